//! Sensitivity functions for the four problems, total sensitivities and the
//! induced sampling distributions.
//!
//! Every formula has the shape `2^(z-1) * dist(x, sol)^z / cost + 2^(2z-1) * s(x)`
//! where the second term depends on the problem:
//!
//! * clustering: `1 / |cluster of x|`
//! * subspace: `sup_u |<y_x, u>|^z / sum_y |<y, u>|^z` over the projected points
//! * flat: the same ratio on projected points lifted by an extra coordinate 1
//! * lines: `3 / i` for the peeling layer `i` containing the projection of `x`
//!
//! When the solution has zero cost the first term is taken to be zero.

use std::io::Write;

use crate::coreset::{peel_partition, PeelingPartition};
use crate::error::{check_dim, invalid, Result};
use crate::geometry::{assign, check_z, residuals_pow, Candidate, CenterSet, Dataset, Flat, LineSet, Solution, Subspace};
use crate::jl::JlMap;
use crate::linalg::{dot, gram_schmidt, norm_sq, rank_tol, solve_spd, solve_square, svd};

/// Coreset constant of the peeling layers used for line sensitivities.
pub const LINE_CORESET_C: f64 = 3.0;

/// Per-point sensitivities with their total and normalized distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityProfile {
    sigma: Vec<f64>,
    total: f64,
    distribution: Vec<f64>,
}

impl SensitivityProfile {
    pub fn from_sigma(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(invalid("empty sensitivity profile"));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(invalid("sensitivities must be finite and nonnegative"));
        }
        let total: f64 = sigma.iter().sum();
        if total <= 0.0 {
            return Err(invalid("total sensitivity must be positive"));
        }
        let distribution = sigma.iter().map(|s| s / total).collect();
        Ok(Self {
            sigma,
            total,
            distribution,
        })
    }

    /// The uniform profile `sigma = 1`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_sigma(vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    /// CSV with columns `index,sigma,sigma_tilde`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,sigma,sigma_tilde")?;
        for (i, (s, p)) in self.sigma.iter().zip(&self.distribution).enumerate() {
            writeln!(w, "{i},{s},{p}")?;
        }
        Ok(())
    }
}

fn first_terms(residuals: &[f64], z: f64) -> Vec<f64> {
    let cost: f64 = residuals.iter().sum();
    let scale = 2f64.powf(z - 1.0);
    if cost > 0.0 {
        residuals.iter().map(|r| scale * r / cost).collect()
    } else {
        vec![0.0; residuals.len()]
    }
}

/// Sizes of the clusters induced by nearest-center assignment.
pub fn cluster_sizes(x: &Dataset, c: &CenterSet) -> Result<Vec<usize>> {
    let labels = assign(x, c)?;
    let mut sizes = vec![0usize; c.k()];
    for l in labels {
        sizes[l] += 1;
    }
    Ok(sizes)
}

/// `2^(z-1) + 2^(2z-1) k'` for `k'` non-empty clusters.
pub fn clustering_total(z: f64, nonempty: usize) -> f64 {
    2f64.powf(z - 1.0) + 2f64.powf(2.0 * z - 1.0) * nonempty as f64
}

pub fn subspace_total_bound(z: f64, k: usize) -> f64 {
    2f64.powf(z - 1.0) + 2f64.powf(2.0 * z - 1.0) * ((k + 1) as f64).powf(1.0 + z)
}

pub fn flat_total_bound(z: f64, k: usize) -> f64 {
    2f64.powf(z - 1.0) + 2f64.powf(2.0 * z - 1.0) * ((k + 2) as f64).powf(1.0 + z)
}

/// `100 (k + 1) 2^z`.
pub fn e4_bound(k: usize, z: f64) -> f64 {
    100.0 * (k + 1) as f64 * 2f64.powf(z)
}

/// Centers with no assigned points do not contribute (their clusters are
/// dropped), so the total is `2^(z-1) + 2^(2z-1) k'` with `k'` the number
/// of non-empty clusters whenever the cost is positive.
pub fn clustering_sensitivity(x: &Dataset, c: &CenterSet, z: f64) -> Result<SensitivityProfile> {
    let residuals = residuals_pow(x, c, z)?;
    let labels = assign(x, c)?;
    let mut sizes = vec![0usize; c.k()];
    for &l in &labels {
        sizes[l] += 1;
    }
    let second = 2f64.powf(2.0 * z - 1.0);
    let sigma = first_terms(&residuals, z)
        .into_iter()
        .zip(&labels)
        .map(|(f, &l)| f + second / sizes[l] as f64)
        .collect();
    SensitivityProfile::from_sigma(sigma)
}

/// The subspace formula. If every projected point is zero the ratio term
/// is `1/n` for all points.
pub fn subspace_sensitivity(x: &Dataset, r: &Subspace, z: f64) -> Result<SensitivityProfile> {
    let residuals = residuals_pow(x, r, z)?;
    let projected = x.map_points(|p| r.closest_point(p))?;
    let ratios = if projected.as_slice().iter().all(|v| *v == 0.0) {
        vec![1.0 / x.n() as f64; x.n()]
    } else {
        sup_ratios(&projected, z)?
    };
    combine(&residuals, &ratios, z)
}

/// The flat formula, computed on projections lifted to `(y, 1)`.
pub fn flat_sensitivity(x: &Dataset, f: &Flat, z: f64) -> Result<SensitivityProfile> {
    let residuals = residuals_pow(x, f, z)?;
    let lifted = x.map_points(|p| {
        let mut y = f.closest_point(p);
        y.push(1.0);
        y
    })?;
    let ratios = sup_ratios(&lifted, z)?;
    combine(&residuals, &ratios, z)
}

fn combine(residuals: &[f64], ratios: &[f64], z: f64) -> Result<SensitivityProfile> {
    let second = 2f64.powf(2.0 * z - 1.0);
    let sigma = first_terms(residuals, z)
        .into_iter()
        .zip(ratios)
        .map(|(f, s)| f + second * s)
        .collect();
    SensitivityProfile::from_sigma(sigma)
}

/// Line sensitivities from a peeling partition of the projected points
/// `y_x` (projection of `x` onto its nearest line): a point whose
/// projection lies in layer `i` (1-based) gets second term `2^(2z-1) 3 / i`.
pub fn line_sensitivity(x: &Dataset, lines: &LineSet, z: f64, peel: &PeelingPartition) -> Result<SensitivityProfile> {
    let residuals = residuals_pow(x, lines, z)?;
    let layer = peel.layer_of(x.n())?;
    let second = 2f64.powf(2.0 * z - 1.0);
    let sigma = first_terms(&residuals, z)
        .into_iter()
        .zip(&layer)
        .map(|(f, &i)| f + second * LINE_CORESET_C / (i + 1) as f64)
        .collect();
    SensitivityProfile::from_sigma(sigma)
}

/// Projections of the points onto their nearest lines, with the line labels.
pub fn line_projections(x: &Dataset, lines: &LineSet) -> Result<(Dataset, Vec<usize>)> {
    check_dim(lines.dim(), x.d())?;
    let labels = assign(x, lines)?;
    let y = x.map_points(|p| lines.closest_point(p))?;
    Ok((y, labels))
}

/// Builds the peeling partition of the projected points and evaluates
/// [`line_sensitivity`].
pub fn line_sensitivity_auto(x: &Dataset, lines: &LineSet, z: f64) -> Result<SensitivityProfile> {
    check_z(z)?;
    let (y, labels) = line_projections(x, lines)?;
    let peel = peel_partition(&y, &labels, lines.k())?;
    line_sensitivity(x, lines, z, &peel)
}

/// Dispatches on the solution type.
pub fn sensitivity(x: &Dataset, sol: &Solution, z: f64) -> Result<SensitivityProfile> {
    match sol {
        Solution::Centers(c) => clustering_sensitivity(x, c, z),
        Solution::Subspace(r) => subspace_sensitivity(x, r, z),
        Solution::Flat(f) => flat_sensitivity(x, f, z),
        Solution::Lines(l) => line_sensitivity_auto(x, l, z),
    }
}

/// `sum_x D_x^(2z) sigma(x)` with `D_x = |Pi(x) - Pi(p_x)| / |x - p_x|`,
/// `p_x` the closest point of the solution; `D_x = 1` on the solution.
pub fn event_e4_statistic<S: Candidate + ?Sized>(
    x: &Dataset,
    sol: &S,
    map: &JlMap,
    z: f64,
    profile: &SensitivityProfile,
) -> Result<f64> {
    check_z(z)?;
    check_dim(sol.dim(), x.d())?;
    check_dim(map.d(), x.d())?;
    check_dim(x.n(), profile.n())?;
    let mut total = 0.0;
    for (p, s) in x.rows().zip(profile.sigma()) {
        let q = sol.closest_point(p);
        let diff: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
        let orig = norm_sq(&diff);
        let ratio_sq = if orig <= 1e-24 * (1.0 + norm_sq(p)) {
            1.0
        } else {
            norm_sq(&map.apply_unchecked(&diff)) / orig
        };
        total += ratio_sq.powf(z) * s;
    }
    Ok(total)
}

/// `sup_u |<y_i, u>|^z / sum_j |<y_j, u>|^z` for one index.
pub fn sup_ratio(y: &Dataset, i: usize, z: f64) -> Result<f64> {
    if i >= y.n() {
        return Err(invalid(format!("index {i} out of range for {} points", y.n())));
    }
    check_z(z)?;
    let frame = SpanFrame::new(y);
    Ok(frame.ratio(i, z))
}

/// [`sup_ratio`] for every index, sharing one decomposition.
pub fn sup_ratios(y: &Dataset, z: f64) -> Result<Vec<f64>> {
    check_z(z)?;
    let frame = SpanFrame::new(y);
    Ok((0..y.n()).map(|i| frame.ratio(i, z)).collect())
}

/// Leverage scores `y_i^T (Y^T Y)^+ y_i`, equal to `sup_ratio` at `z = 2`.
pub fn leverage_scores(y: &Dataset) -> Vec<f64> {
    SpanFrame::new(y).leverage.clone()
}

/// Coordinates of the points in an orthonormal basis of their span.
struct SpanFrame {
    rank: usize,
    coords: Vec<Vec<f64>>,
    leverage: Vec<f64>,
    zero: Vec<bool>,
}

impl SpanFrame {
    fn new(y: &Dataset) -> Self {
        let s = svd(y.n(), y.d(), y.as_slice());
        let tol = rank_tol(&s.values, y.n(), y.d());
        let rank = s.values.iter().take_while(|v| **v > tol).count();
        let coords: Vec<Vec<f64>> = (0..y.n())
            .map(|j| (0..rank).map(|c| s.u[c][j] * s.values[c]).collect())
            .collect();
        let leverage: Vec<f64> = (0..y.n())
            .map(|j| (0..rank).map(|c| s.u[c][j] * s.u[c][j]).sum())
            .collect();
        let zero: Vec<bool> = y.rows().map(|p| p.iter().all(|v| *v == 0.0)).collect();
        let leverage = leverage.into_iter().zip(&zero).map(|(l, &z)| if z { 0.0 } else { l }).collect();
        Self { rank, coords, leverage, zero }
    }

    fn ratio(&self, i: usize, z: f64) -> f64 {
        let a_i = &self.coords[i];
        if self.rank == 0 || self.zero[i] || norm_sq(a_i) == 0.0 {
            return 0.0;
        }
        if z == 2.0 {
            return self.leverage[i].min(1.0);
        }
        if self.rank == 1 {
            let num = a_i[0].abs().powf(z);
            let den: f64 = self.coords.iter().map(|a| a[0].abs().powf(z)).sum();
            return num / den;
        }
        1.0 / min_constrained_norm(&self.coords, i, z)
    }
}

/// `min sum_j |<a_j, u>|^z` subject to `<a_i, u> = 1`.
///
/// The problem is convex for `z >= 1`. It is solved by damped Newton on
/// the smoothed objective `sum_j (r_j^2 + delta^2)^(z/2)` with `delta`
/// driven towards zero, warm-started at the least-squares solution. For
/// `z = 1` the optimum sits at a vertex where `rank - 1` residuals vanish,
/// and the nearest vertex is tried as a final polish.
fn min_constrained_norm(coords: &[Vec<f64>], i: usize, z: f64) -> f64 {
    let a_i = &coords[i];
    let r = a_i.len();
    let an = norm_sq(a_i);
    let u0: Vec<f64> = a_i.iter().map(|v| v / an).collect();

    // orthonormal basis of the complement of a_i
    let mut seeds = vec![a_i.clone()];
    for c in 0..r {
        let mut e = vec![0.0; r];
        e[c] = 1.0;
        seeds.push(e);
    }
    let frame = gram_schmidt(&seeds, 1e-8);
    let comp: Vec<Vec<f64>> = frame.into_iter().skip(1).take(r - 1).collect();
    let m = comp.len();

    let alpha: Vec<f64> = coords.iter().map(|a| dot(a, &u0)).collect();
    let beta: Vec<Vec<f64>> = coords.iter().map(|a| comp.iter().map(|n| dot(a, n)).collect()).collect();

    let objective = |c: &[f64], delta: f64| -> f64 {
        alpha
            .iter()
            .zip(&beta)
            .map(|(al, be)| {
                let res = al + dot(be, c);
                (res * res + delta * delta).powf(0.5 * z)
            })
            .sum()
    };

    // least-squares warm start: minimize sum (alpha + beta c)^2
    let mut c = {
        let mut h = vec![0.0; m * m];
        let mut g = vec![0.0; m];
        for (al, be) in alpha.iter().zip(&beta) {
            for p in 0..m {
                g[p] -= al * be[p];
                for q in 0..m {
                    h[p * m + q] += be[p] * be[q];
                }
            }
        }
        solve_spd(m, &h, &g).unwrap_or_else(|| vec![0.0; m])
    };

    let mut delta = 0.1;
    while delta > 1e-13 {
        for _ in 0..60 {
            let mut g = vec![0.0; m];
            let mut h = vec![0.0; m * m];
            for (al, be) in alpha.iter().zip(&beta) {
                let res = al + dot(be, &c);
                let s = res * res + delta * delta;
                let d1 = z * res * s.powf(0.5 * z - 1.0);
                let d2 = z * s.powf(0.5 * z - 2.0) * ((z - 1.0) * res * res + delta * delta);
                for p in 0..m {
                    g[p] += d1 * be[p];
                    for q in 0..m {
                        h[p * m + q] += d2 * be[p] * be[q];
                    }
                }
            }
            let trace: f64 = (0..m).map(|p| h[p * m + p]).sum();
            for p in 0..m {
                h[p * m + p] += 1e-14 * trace.max(1e-300);
            }
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(step) = solve_spd(m, &h, &neg_g) else { break };
            let decrease = -dot(&g, &step);
            if decrease.is_nan() || decrease <= 0.0 {
                break;
            }
            let f0 = objective(&c, delta);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..50 {
                let trial: Vec<f64> = c.iter().zip(&step).map(|(a, b)| a + t * b).collect();
                if objective(&trial, delta) <= f0 - 1e-4 * t * decrease {
                    c = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved || decrease < 1e-15 * f0 {
                break;
            }
        }
        delta *= 0.1;
    }

    let exact = |c: &[f64]| -> f64 {
        alpha
            .iter()
            .zip(&beta)
            .map(|(al, be)| (al + dot(be, c)).abs().powf(z))
            .sum()
    };
    let mut best = exact(&c);

    if z == 1.0 && m > 0 {
        // vertex polish: zero out the m smallest residuals other than i
        let mut order: Vec<usize> = (0..coords.len()).filter(|&j| j != i).collect();
        order.sort_by(|&p, &q| {
            let rp = (alpha[p] + dot(&beta[p], &c)).abs();
            let rq = (alpha[q] + dot(&beta[q], &c)).abs();
            rp.partial_cmp(&rq).unwrap_or(std::cmp::Ordering::Equal)
        });
        let active: Vec<usize> = order.into_iter().take(m).collect();
        if active.len() == m {
            // beta_j c = -alpha_j for j in active
            let mut a = vec![0.0; m * m];
            let mut b = vec![0.0; m];
            for (row, &j) in active.iter().enumerate() {
                a[row * m..(row + 1) * m].copy_from_slice(&beta[j]);
                b[row] = -alpha[j];
            }
            if let Some(cand) = solve_square(m, &a, &b) {
                best = best.min(exact(&cand));
            }
        }
    }
    best.max(1.0)
}
