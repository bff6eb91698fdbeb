//! Sensitivity-sampling coresets and 3-coresets for `(k, inf)`-line
//! approximation of points lying on lines.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{residuals_pow, Candidate, Dataset, WeightedSet};
use crate::linalg::{dist_sq, dot, norm};
use crate::rng;
use crate::sensitivity::SensitivityProfile;

/// A weighted multiset of indices into a base dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl Coreset {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    /// The sampled points (with repeats) and their weights.
    pub fn to_weighted_set(&self, base: &Dataset) -> Result<WeightedSet> {
        WeightedSet::new(base.subset(&self.indices)?, self.weights.clone())
    }

    /// `sum_j w_j dist(x_{indices[j]}, sol)^z`.
    pub fn cost_pow<S: Candidate + ?Sized>(&self, base: &Dataset, sol: &S, z: f64) -> Result<f64> {
        let r = residuals_pow(base, sol, z)?;
        Ok(self.indices.iter().zip(&self.weights).map(|(&i, w)| w * r[i]).sum())
    }

    /// CSV with columns `index,weight`, one row per draw.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,weight")?;
        for (i, wt) in self.indices.iter().zip(&self.weights) {
            writeln!(w, "{i},{wt}")?;
        }
        Ok(())
    }
}

/// `m` i.i.d. draws from the profile's distribution, each weighted
/// `1 / (m * p(x))`.
pub fn sensitivity_sample(x: &Dataset, profile: &SensitivityProfile, m: usize, seed: u64) -> Result<Coreset> {
    sensitivity_sample_stream(x, profile, m, seed, 0)
}

pub fn sensitivity_sample_stream(
    x: &Dataset,
    profile: &SensitivityProfile,
    m: usize,
    seed: u64,
    stream: u64,
) -> Result<Coreset> {
    check_dim(x.n(), profile.n())?;
    if m == 0 {
        return Err(invalid("coreset size m must be >= 1"));
    }
    let p = profile.distribution();
    let dist = WeightedIndex::new(p).map_err(|e| invalid(format!("bad sampling distribution: {e}")))?;
    let mut r = rng::stream(seed, stream);
    let mf = m as f64;
    let indices: Vec<usize> = (0..m).map(|_| dist.sample(&mut r)).collect();
    let weights = indices.iter().map(|&i| 1.0 / (mf * p[i])).collect();
    Ok(Coreset { indices, weights })
}

/// Ordered layers `A_1, ..., A_s` partitioning the point indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelingPartition {
    layers: Vec<Vec<usize>>,
}

impl PeelingPartition {
    /// Checks that the layers partition `0..n`.
    pub fn new(layers: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let p = Self { layers };
        p.layer_of(n)?;
        Ok(p)
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// 0-based layer of each of the `n` points.
    pub fn layer_of(&self, n: usize) -> Result<Vec<usize>> {
        let mut out = vec![usize::MAX; n];
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(invalid(format!("peeling layer {} is empty", li + 1)));
            }
            for &i in layer {
                if i >= n {
                    return Err(invalid(format!("peeling index {i} out of range for {n} points")));
                }
                if out[i] != usize::MAX {
                    return Err(invalid(format!("index {i} appears in more than one layer")));
                }
                out[i] = li;
            }
        }
        if let Some(missing) = out.iter().position(|&l| l == usize::MAX) {
            return Err(invalid(format!("index {missing} is in no layer")));
        }
        Ok(out)
    }

    /// CSV with columns `index,layer` (layers numbered from 1).
    pub fn write_csv<W: Write>(&self, n: usize, mut w: W) -> Result<()> {
        let layer = self.layer_of(n)?;
        writeln!(w, "index,layer")?;
        for (i, l) in layer.iter().enumerate() {
            writeln!(w, "{i},{}", l + 1)?;
        }
        Ok(())
    }
}

/// Relative collinearity tolerance.
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Orders points of one line. The orientation is fixed intrinsically: it
/// points from the lowest-index member towards the lowest-index member at
/// a different position. This order is preserved by any linear map that
/// does not collapse the line, which is what makes coresets commute with
/// projections. Equal positions are ordered by index.
fn order_on_line(y: &Dataset, members: &[usize]) -> Result<Vec<(usize, f64)>> {
    let mut members = members.to_vec();
    members.sort_unstable();
    let a = members[0];
    let ya = y.row(a);
    let (far, far_sq) = members
        .iter()
        .map(|&j| (j, dist_sq(ya, y.row(j))))
        .fold((a, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if far_sq == 0.0 {
        return Ok(members.into_iter().map(|j| (j, 0.0)).collect());
    }
    let extent = far_sq.sqrt();
    let mut dir: Vec<f64> = y.row(far).iter().zip(ya).map(|(p, q)| (p - q) / extent).collect();

    let scale = members.iter().map(|&j| norm(y.row(j))).fold(extent, f64::max);
    let tol = COLLINEAR_TOL * scale;
    let mut deviation: f64 = 0.0;
    for &j in &members {
        let w: Vec<f64> = y.row(j).iter().zip(ya).map(|(p, q)| p - q).collect();
        let s = dot(&w, &dir);
        let off: f64 = w.iter().zip(&dir).map(|(wi, ui)| (wi - s * ui).powi(2)).sum();
        deviation = deviation.max(off.sqrt());
    }
    if deviation > tol {
        return Err(Error::NotCollinear { deviation });
    }

    let distinct = (1e-12 * extent).powi(2);
    let b = members
        .iter()
        .copied()
        .find(|&j| dist_sq(ya, y.row(j)) > distinct)
        .expect("far point is distinct");
    let sb: f64 = y.row(b).iter().zip(ya).zip(&dir).map(|((p, q), u)| (p - q) * u).sum();
    if sb < 0.0 {
        dir.iter_mut().for_each(|u| *u = -*u);
    }

    let mut seq: Vec<(usize, f64)> = members
        .iter()
        .map(|&j| {
            let s: f64 = y.row(j).iter().zip(ya).zip(&dir).map(|((p, q), u)| (p - q) * u).sum();
            (j, s)
        })
        .collect();
    seq.sort_by(|p, q| p.1.partial_cmp(&q.1).unwrap_or(std::cmp::Ordering::Equal).then(p.0.cmp(&q.0)));
    Ok(seq)
}

/// Recursive construction on an ordered sequence. Keeps the two ends and
/// the middle point `y_ceil(n/2)`, then recurses into the half on the longer
/// side of the middle (for `k` and `k - 1` intervals) and the other half
/// including the middle (for `k - 1` intervals). Gap ties go left.
fn build_1d(seq: &[(usize, f64)], k: usize, out: &mut BTreeSet<usize>) {
    let n = seq.len();
    if n == 0 || k == 0 {
        return;
    }
    if k == 1 {
        out.insert(seq[0].0);
        out.insert(seq[n - 1].0);
        return;
    }
    if n <= 3 {
        out.extend(seq.iter().map(|p| p.0));
        return;
    }
    let mid = n.div_ceil(2) - 1;
    out.insert(seq[0].0);
    out.insert(seq[mid].0);
    out.insert(seq[n - 1].0);
    let left_gap = seq[mid].1 - seq[0].1;
    let right_gap = seq[n - 1].1 - seq[mid].1;
    let tie = 1e-9 * (left_gap.abs() + right_gap.abs());
    let (heavy, light) = if left_gap >= right_gap - tie {
        (&seq[..n / 2], &seq[mid..])
    } else {
        (&seq[mid + 1..], &seq[..=mid])
    };
    build_1d(heavy, k, out);
    build_1d(heavy, k - 1, out);
    build_1d(light, k - 1, out);
}

/// A 3-coreset for `(k, inf)`-line approximation of collinear points.
/// Returns sorted indices.
pub fn line_coreset_1d(y: &Dataset, k: usize) -> Result<Vec<usize>> {
    let all: Vec<usize> = (0..y.n()).collect();
    coreset_of_members(y, &all, k)
}

fn coreset_of_members(y: &Dataset, members: &[usize], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    let seq = order_on_line(y, members)?;
    let mut out = BTreeSet::new();
    build_1d(&seq, k, &mut out);
    Ok(out.into_iter().collect())
}

fn groups(labels: &[usize], members: impl Iterator<Item = usize>) -> BTreeMap<usize, Vec<usize>> {
    let mut g: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in members {
        g.entry(labels[i]).or_default().push(i);
    }
    g
}

/// Union over line groups of [`line_coreset_1d`]; `labels[i]` names the
/// line point `i` lies on.
pub fn line_coreset_klines(y: &Dataset, labels: &[usize], k: usize) -> Result<Vec<usize>> {
    check_dim(y.n(), labels.len())?;
    klines_of_members(y, labels, &(0..y.n()).collect::<Vec<_>>(), k)
}

fn klines_of_members(y: &Dataset, labels: &[usize], members: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (_, g) in groups(labels, members.iter().copied()) {
        out.extend(coreset_of_members(y, &g, k)?);
    }
    out.sort_unstable();
    Ok(out)
}

/// Repeatedly removes a 3-coreset of the remaining points.
pub fn peel_partition(y: &Dataset, labels: &[usize], k: usize) -> Result<PeelingPartition> {
    check_dim(y.n(), labels.len())?;
    let mut remaining: Vec<usize> = (0..y.n()).collect();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let layer = klines_of_members(y, labels, &remaining, k)?;
        let taken: BTreeSet<usize> = layer.iter().copied().collect();
        remaining.retain(|i| !taken.contains(i));
        layers.push(layer);
    }
    Ok(PeelingPartition { layers })
}
