//! Gaussian Johnson-Lindenstrauss maps and distortion diagnostics.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{check_dim, invalid, Result};
use crate::geometry::{Dataset, Subspace};
use crate::linalg::{dist_sq, dot, svd};
use crate::rng;

/// A `t x d` matrix with i.i.d. `N(0, 1/t)` entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JlMap {
    t: usize,
    d: usize,
    seed: u64,
    matrix: Vec<f64>,
}

impl JlMap {
    /// Entries are drawn row by row from stream `(seed, stream)`.
    pub fn sample_stream(d: usize, t: usize, seed: u64, stream: u64) -> Result<Self> {
        if d == 0 || t == 0 {
            return Err(invalid(format!("JL map needs d >= 1 and t >= 1 (got d={d}, t={t})")));
        }
        let mut r = rng::stream(seed, stream);
        let scale = 1.0 / (t as f64).sqrt();
        let matrix = (0..t * d)
            .map(|_| {
                let g: f64 = r.sample(StandardNormal);
                g * scale
            })
            .collect();
        Ok(Self { t, d, seed, matrix })
    }

    /// Wraps an explicit row-major `t x d` matrix (seed recorded as 0).
    pub fn from_matrix(t: usize, d: usize, matrix: Vec<f64>) -> Result<Self> {
        if d == 0 || t == 0 {
            return Err(invalid("JL map needs d >= 1 and t >= 1"));
        }
        check_dim(t * d, matrix.len())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite matrix entry"));
        }
        Ok(Self { t, d, seed: 0, matrix })
    }

    pub fn identity(d: usize) -> Result<Self> {
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        Self::from_matrix(d, d, m)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.d + col]
    }

    /// Image of the `j`-th standard basis vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.t).map(|i| self.entry(i, j)).collect()
    }

    pub fn apply_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.d, x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.chunks_exact(self.d).map(|row| dot(row, x)).collect()
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        check_dim(self.d, data.d())?;
        let mut out = Vec::with_capacity(data.n() * self.t);
        for x in data.rows() {
            out.extend(self.apply_unchecked(x));
        }
        Dataset::new(data.n(), self.t, out)
    }

    /// The matrix as a `t`-point dataset in `R^d`, for the shared text format.
    pub fn to_dataset(&self) -> Dataset {
        Dataset::new(self.t, self.d, self.matrix.clone()).expect("validated at construction")
    }
}

pub fn sample_jl(d: usize, t: usize, seed: u64) -> Result<JlMap> {
    JlMap::sample_stream(d, t, seed, 0)
}

pub fn apply(map: &JlMap, data: &Dataset) -> Result<Dataset> {
    map.apply(data)
}

/// Monte Carlo estimate of `E[(|Pi x - Pi y|^z / |x - y|^z - 1)^+]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// `((1 + eps)^z - 1) / 100`.
    pub bound: f64,
    pub trials: usize,
}

impl MomentEstimate {
    pub fn within_bound(&self, std_errors: f64) -> bool {
        self.mean <= self.bound + std_errors * self.std_error
    }
}

/// By 2-stability, `|Pi(x) - Pi(y)|^2 / |x - y|^2` is distributed as
/// `chi^2_t / t` for any fixed `x != y`, so each trial draws that ratio directly.
pub fn moment_bound_statistic(z: f64, eps: f64, t: usize, trials: usize, seed: u64) -> Result<MomentEstimate> {
    crate::geometry::check_z(z)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps must be positive"));
    }
    if t == 0 {
        return Err(invalid("t must be >= 1"));
    }
    if trials < 1000 {
        return Err(invalid(format!("need at least 1000 trials (got {trials})")));
    }
    let chi = ChiSquared::new(t as f64).map_err(|e| invalid(e.to_string()))?;
    let mut r = rng::stream(seed, 0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let q = chi.sample(&mut r) / t as f64;
        let excess = (q.powf(0.5 * z) - 1.0).max(0.0);
        sum += excess;
        sum_sq += excess * excess;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MomentEstimate {
        mean,
        std_error: (var / n).sqrt(),
        bound: ((1.0 + eps).powf(z) - 1.0) / 100.0,
        trials,
    })
}

/// Singular values of `Pi` restricted to the subspace (of `Pi B^T`), in
/// decreasing order. A rank deficit when `t < dim` shows up as zeros.
pub fn restriction_singular_values(map: &JlMap, basis: &Subspace) -> Result<Vec<f64>> {
    check_dim(map.d(), basis.ambient())?;
    let j = basis.rank();
    if j == 0 {
        return Ok(vec![]);
    }
    let images: Vec<Vec<f64>> = basis.basis().iter().map(|b| map.apply_unchecked(b)).collect();
    // t x j, row-major
    let mut m = vec![0.0; map.t() * j];
    for (c, img) in images.iter().enumerate() {
        for (r, v) in img.iter().enumerate() {
            m[r * j + c] = *v;
        }
    }
    let mut values = svd(map.t(), j, &m).values;
    values.resize(j, 0.0);
    Ok(values)
}

/// Slack on the singular-value test to absorb rounding.
const EMBEDDING_SLACK: f64 = 1e-12;

/// Whether `1/(1+eps) <= |Pi x| / |x| <= 1+eps` for all nonzero `x` in the
/// subspace, decided from the extreme singular values.
pub fn is_subspace_embedding(map: &JlMap, basis: &Subspace, eps: f64) -> Result<bool> {
    if eps.is_nan() || eps < 0.0 {
        return Err(invalid("eps must be nonnegative"));
    }
    let s = restriction_singular_values(map, basis)?;
    let lo = 1.0 / (1.0 + eps) - EMBEDDING_SLACK;
    let hi = 1.0 + eps + EMBEDDING_SLACK;
    Ok(s.iter().all(|&v| v >= lo && v <= hi))
}

/// Worst pairwise distortion `max(r, 1/r)` over distinct pairs, where `r`
/// is the ratio of projected to original distance. Returns infinity if a
/// pair of distinct points collapses.
pub fn bi_lipschitz_distortion(map: &JlMap, points: &Dataset) -> Result<f64> {
    let projected = map.apply(points)?;
    let mut worst: f64 = 1.0;
    for i in 0..points.n() {
        for j in i + 1..points.n() {
            let orig = dist_sq(points.row(i), points.row(j));
            if orig == 0.0 {
                continue;
            }
            let proj = dist_sq(projected.row(i), projected.row(j));
            if proj == 0.0 {
                return Ok(f64::INFINITY);
            }
            let r = (proj / orig).sqrt();
            worst = worst.max(r).max(1.0 / r);
        }
    }
    Ok(worst)
}

pub fn is_bi_lipschitz(map: &JlMap, points: &Dataset, eps: f64) -> Result<bool> {
    Ok(bi_lipschitz_distortion(map, points)? <= 1.0 + eps)
}
