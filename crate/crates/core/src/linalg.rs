//! Dense vector helpers and thin wrappers over faer decompositions.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `dist^z` given the squared distance, with the two common exponents on
/// fast paths.
#[inline]
pub fn pow_from_sq(sq: f64, z: f64) -> f64 {
    if z == 2.0 {
        sq
    } else if z == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(0.5 * z)
    }
}

/// Modified Gram-Schmidt. Vectors whose residual norm falls below
/// `rel_tol` times their original norm are dropped.
pub fn gram_schmidt(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let nw = norm(&w);
        if nw > rel_tol * n0 {
            basis.push(scale(&w, 1.0 / nw));
        }
    }
    basis
}

/// Row-major slice to a dense matrix.
pub fn to_matrix(rows: usize, cols: usize, data: &[f64]) -> Mat<f64> {
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Thin SVD of a row-major `rows x cols` matrix, sorted by decreasing
/// singular value.
pub struct Svd {
    pub values: Vec<f64>,
    /// `u[j]` is the j-th left singular vector (length `rows`).
    pub u: Vec<Vec<f64>>,
    /// `v[j]` is the j-th right singular vector (length `cols`).
    pub v: Vec<Vec<f64>>,
}

pub fn svd(rows: usize, cols: usize, data: &[f64]) -> Svd {
    let empty = Svd {
        values: vec![],
        u: vec![],
        v: vec![],
    };
    if rows == 0 || cols == 0 {
        return empty;
    }
    let m = to_matrix(rows, cols, data);
    let Ok(dec) = m.thin_svd() else { return empty };
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let r = s.nrows();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    Svd {
        values: order.iter().map(|&j| s[j]).collect(),
        u: order.iter().map(|&j| (0..rows).map(|i| u[(i, j)]).collect()).collect(),
        v: order.iter().map(|&j| (0..cols).map(|i| v[(i, j)]).collect()).collect(),
    }
}

/// Numerical rank threshold used when deciding which singular values are zero.
pub fn rank_tol(values: &[f64], rows: usize, cols: usize) -> f64 {
    let top = values.first().copied().unwrap_or(0.0);
    top * (rows.max(cols) as f64) * f64::EPSILON * 16.0
}

/// Orthonormal basis of the span of the given row vectors (via SVD).
pub fn span_basis(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return vec![];
    }
    let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let s = svd(rows.len(), dim, &flat);
    let tol = rank_tol(&s.values, rows.len(), dim);
    s.values
        .iter()
        .zip(s.v)
        .filter(|(sv, _)| **sv > tol)
        .map(|(_, v)| v)
        .collect()
}

/// Solve a small dense symmetric positive (semi)definite system, falling
/// back to LU when Cholesky fails.
pub fn solve_spd(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let m = to_matrix(n, n, a);
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    if let Ok(ch) = m.llt(Side::Lower) {
        return finite(ch.solve(&rhs));
    }
    solve_square(n, a, b)
}

/// Solve a square system by LU with partial pivoting; `None` when the
/// result is not finite.
pub fn solve_square(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let m = to_matrix(n, n, a);
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    finite(m.partial_piv_lu().solve(&rhs))
}

fn finite(x: Mat<f64>) -> Option<Vec<f64>> {
    let v: Vec<f64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    v.iter().all(|t| t.is_finite()).then_some(v)
}
