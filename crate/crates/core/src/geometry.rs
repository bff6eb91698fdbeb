//! Datasets, candidate solutions and cost evaluation.
//!
//! The four solution families share the [`Candidate`] trait: a point's
//! distance to a solution is the distance to its closest point, minimized
//! over components (centers or lines). Ties resolve to the lowest index.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{axpy, dist_sq, dot, gram_schmidt, norm, pow_from_sq, sub};

/// Orthonormality tolerance for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid(format!("dataset needs n >= 1 and d >= 1 (got {n} x {d})")));
        }
        if data.len() != n * d {
            return Err(invalid(format!(
                "dataset buffer has {} entries, expected {n} x {d}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite coordinate in point {}", pos / d)));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        for r in rows {
            check_dim(d, r.len())?;
        }
        Self::new(rows.len(), d, rows.iter().flatten().copied().collect())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Rows at the given indices, in order, repeats allowed.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(invalid(format!("index {i} out of range for {} points", self.n)));
            }
            data.extend_from_slice(self.row(i));
        }
        Dataset::new(indices.len(), self.d, data)
    }

    pub fn translated(&self, v: &[f64]) -> Result<Dataset> {
        check_dim(self.d, v.len())?;
        let data = self
            .rows()
            .flat_map(|r| r.iter().zip(v).map(|(a, b)| a + b))
            .collect();
        Dataset::new(self.n, self.d, data)
    }

    pub fn scaled(&self, alpha: f64) -> Result<Dataset> {
        Dataset::new(self.n, self.d, self.data.iter().map(|x| x * alpha).collect())
    }

    /// Applies `f` to every point; all outputs must share one dimension.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Dataset> {
        let rows: Vec<Vec<f64>> = self.rows().map(f).collect();
        Dataset::from_rows(&rows)
    }

    /// Appends a copy of `point`.
    pub fn with_point(&self, point: &[f64]) -> Result<Dataset> {
        check_dim(self.d, point.len())?;
        let mut data = self.data.clone();
        data.extend_from_slice(point);
        Dataset::new(self.n + 1, self.d, data)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for r in self.rows() {
            axpy(1.0, r, &mut m);
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }
}

/// A dataset with nonnegative per-point weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSet {
    pub base: Dataset,
    pub weights: Vec<f64>,
}

impl WeightedSet {
    pub fn new(base: Dataset, weights: Vec<f64>) -> Result<Self> {
        check_dim(base.n(), weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(invalid("at least one weight must be positive"));
        }
        Ok(Self { base, weights })
    }

    pub fn uniform(base: Dataset) -> Self {
        let weights = vec![1.0; base.n()];
        Self { base, weights }
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn d(&self) -> usize {
        self.base.d()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Common interface of the four solution families.
pub trait Candidate {
    /// Ambient dimension.
    fn dim(&self) -> usize;

    /// Index of the closest component and the squared distance to it.
    fn nearest(&self, x: &[f64]) -> (usize, f64);

    /// Closest point of the solution to `x`.
    fn closest_point(&self, x: &[f64]) -> Vec<f64>;
}

/// `k` centers for (k,z)-clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    d: usize,
    centers: Vec<Vec<f64>>,
}

impl CenterSet {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        let d = centers.first().map(Vec::len).ok_or_else(|| invalid("empty center set"))?;
        if d == 0 {
            return Err(invalid("centers must have dimension >= 1"));
        }
        for c in &centers {
            check_dim(d, c.len())?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(invalid("non-finite center coordinate"));
            }
        }
        Ok(Self { d, centers })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i]
    }
}

impl Candidate for CenterSet {
    fn dim(&self) -> usize {
        self.d
    }

    fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.centers.iter().enumerate() {
            let s = dist_sq(x, c);
            if s < best.1 {
                best = (i, s);
            }
        }
        best
    }

    fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        self.centers[self.nearest(x).0].clone()
    }
}

/// A linear subspace given by orthonormal basis rows (possibly zero rows,
/// which is the origin).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    d: usize,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Rejects bases whose Gram matrix deviates from the identity by more
    /// than [`ORTHONORMAL_TOL`].
    pub fn new(d: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("ambient dimension must be >= 1"));
        }
        if basis.len() > d {
            return Err(invalid(format!("{} basis vectors exceed dimension {d}", basis.len())));
        }
        for b in &basis {
            check_dim(d, b.len())?;
        }
        let mut deviation: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = dot(a, b);
                if !g.is_finite() {
                    return Err(invalid("non-finite basis entry"));
                }
                deviation = deviation.max((g - target).abs());
            }
        }
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { d, basis })
    }

    /// Orthonormalizes arbitrary spanning vectors, dropping dependent ones.
    pub fn from_spanning(d: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        for v in vectors {
            check_dim(d, v.len())?;
        }
        Self::new(d, gram_schmidt(vectors, 1e-10))
    }

    pub fn zero(d: usize) -> Self {
        Self { d, basis: vec![] }
    }

    /// Dimension of the subspace.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Coordinates `<x, r_i>` in the basis.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(x, b)).collect()
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for b in &self.basis {
            axpy(dot(x, b), b, &mut out);
        }
        out
    }

    /// Squared distance from `x` to the subspace.
    pub fn residual_sq(&self, x: &[f64]) -> f64 {
        let p = self.project_unchecked(x);
        dist_sq(x, &p)
    }
}

impl Candidate for Subspace {
    fn dim(&self) -> usize {
        self.d
    }

    fn nearest(&self, x: &[f64]) -> (usize, f64) {
        (0, self.residual_sq(x))
    }

    fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        self.project_unchecked(x)
    }
}

/// An affine subspace `{x + tau : x in direction}` in canonical form
/// (`tau` orthogonal to the direction).
#[derive(Debug, Clone, PartialEq)]
pub struct Flat {
    direction: Subspace,
    translation: Vec<f64>,
}

impl Flat {
    /// Builds the flat through `point` parallel to `direction`.
    pub fn new(direction: Subspace, point: Vec<f64>) -> Result<Self> {
        check_dim(direction.ambient(), point.len())?;
        if point.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite translation"));
        }
        let p = direction.project_unchecked(&point);
        let translation = sub(&point, &p);
        Ok(Self {
            direction,
            translation,
        })
    }

    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn translated(&self, v: &[f64]) -> Result<Flat> {
        check_dim(self.direction.ambient(), v.len())?;
        let p: Vec<f64> = self.translation.iter().zip(v).map(|(a, b)| a + b).collect();
        Flat::new(self.direction.clone(), p)
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let shifted = sub(x, &self.translation);
        let mut out = self.direction.project_unchecked(&shifted);
        axpy(1.0, &self.translation, &mut out);
        out
    }
}

impl Candidate for Flat {
    fn dim(&self) -> usize {
        self.direction.ambient()
    }

    fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let shifted = sub(x, &self.translation);
        (0, self.direction.residual_sq(&shifted))
    }

    fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        self.project_unchecked(x)
    }
}

/// Coordinates below this magnitude are skipped when fixing the sign of a
/// line direction.
pub const SIGN_TOL: f64 = 1e-12;

/// A line `{v + s u}` in canonical form: `|u| = 1`, `<v, u> = 0`, and the
/// first coordinate of `u` exceeding [`SIGN_TOL`] in magnitude is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    anchor: Vec<f64>,
    direction: Vec<f64>,
}

impl Line {
    pub fn new(point: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        check_dim(point.len(), direction.len())?;
        if point.is_empty() {
            return Err(invalid("line in zero dimensions"));
        }
        if point.iter().chain(&direction).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite line parameter"));
        }
        let len = norm(&direction);
        if len <= f64::MIN_POSITIVE {
            return Err(invalid("line direction must be nonzero"));
        }
        let mut u: Vec<f64> = direction.iter().map(|x| x / len).collect();
        if let Some(first) = u.iter().find(|c| c.abs() > SIGN_TOL) {
            if *first < 0.0 {
                u.iter_mut().for_each(|c| *c = -*c);
            }
        }
        let along = dot(&point, &u);
        let mut anchor = point;
        axpy(-along, &u, &mut anchor);
        Ok(Self {
            anchor,
            direction: u,
        })
    }

    /// Line through two distinct points.
    pub fn through(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(a.to_vec(), sub(b, a))
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let s = dot(&sub(x, &self.anchor), &self.direction);
        let mut out = self.anchor.clone();
        axpy(s, &self.direction, &mut out);
        out
    }

    pub fn dist_sq(&self, x: &[f64]) -> f64 {
        let w = sub(x, &self.anchor);
        let s = dot(&w, &self.direction);
        w.iter().zip(&self.direction).map(|(wi, ui)| (wi - s * ui).powi(2)).sum()
    }
}

/// `k >= 1` lines sharing an ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    lines: Vec<Line>,
}

impl LineSet {
    pub fn new(lines: Vec<Line>) -> Result<Self> {
        let d = lines.first().map(Line::dim).ok_or_else(|| invalid("empty line set"))?;
        for l in &lines {
            check_dim(d, l.dim())?;
        }
        Ok(Self { lines })
    }

    pub fn k(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }
}

impl Candidate for LineSet {
    fn dim(&self) -> usize {
        self.lines[0].dim()
    }

    fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, l) in self.lines.iter().enumerate() {
            let s = l.dist_sq(x);
            if s < best.1 {
                best = (i, s);
            }
        }
        best
    }

    fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        self.lines[self.nearest(x).0].project_unchecked(x)
    }
}

/// The four projective clustering problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Clustering,
    Subspace,
    Flat,
    Lines,
}

impl Problem {
    pub const ALL: [Problem; 4] = [Problem::Clustering, Problem::Subspace, Problem::Flat, Problem::Lines];

    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Clustering => "clustering",
            Problem::Subspace => "subspace",
            Problem::Flat => "flat",
            Problem::Lines => "lines",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clustering" => Ok(Problem::Clustering),
            "subspace" => Ok(Problem::Subspace),
            "flat" => Ok(Problem::Flat),
            "lines" => Ok(Problem::Lines),
            other => Err(invalid(format!("unknown problem '{other}'"))),
        }
    }
}

/// A solution of any of the four problems.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Centers(CenterSet),
    Subspace(Subspace),
    Flat(Flat),
    Lines(LineSet),
}

impl Solution {
    pub fn problem(&self) -> Problem {
        match self {
            Solution::Centers(_) => Problem::Clustering,
            Solution::Subspace(_) => Problem::Subspace,
            Solution::Flat(_) => Problem::Flat,
            Solution::Lines(_) => Problem::Lines,
        }
    }

    fn inner(&self) -> &dyn Candidate {
        match self {
            Solution::Centers(c) => c,
            Solution::Subspace(s) => s,
            Solution::Flat(f) => f,
            Solution::Lines(l) => l,
        }
    }
}

impl Candidate for Solution {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn nearest(&self, x: &[f64]) -> (usize, f64) {
        self.inner().nearest(x)
    }

    fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        self.inner().closest_point(x)
    }
}

pub fn project_subspace(x: &[f64], r: &Subspace) -> Result<Vec<f64>> {
    check_dim(r.ambient(), x.len())?;
    Ok(r.project_unchecked(x))
}

pub fn project_flat(x: &[f64], f: &Flat) -> Result<Vec<f64>> {
    check_dim(f.dim(), x.len())?;
    Ok(f.project_unchecked(x))
}

pub fn project_line(x: &[f64], l: &Line) -> Result<Vec<f64>> {
    check_dim(l.dim(), x.len())?;
    Ok(l.project_unchecked(x))
}

pub(crate) fn check_z(z: f64) -> Result<()> {
    if z.is_finite() && z >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("exponent z must be a finite real >= 1 (got {z})")))
    }
}

/// Nearest-component index of every point (ties to the lowest index).
pub fn assign<S: Candidate + ?Sized>(data: &Dataset, sol: &S) -> Result<Vec<usize>> {
    check_dim(sol.dim(), data.d())?;
    Ok(data.rows().map(|x| sol.nearest(x).0).collect())
}

/// `dist(x, sol)^z` for every point.
pub fn residuals_pow<S: Candidate + ?Sized>(data: &Dataset, sol: &S, z: f64) -> Result<Vec<f64>> {
    check_z(z)?;
    check_dim(sol.dim(), data.d())?;
    Ok(data.rows().map(|x| pow_from_sq(sol.nearest(x).1, z)).collect())
}

/// `sum_x dist(x, sol)^z`.
pub fn cost_pow<S: Candidate + ?Sized>(data: &Dataset, sol: &S, z: f64) -> Result<f64> {
    Ok(residuals_pow(data, sol, z)?.iter().sum())
}

/// `sum_x w(x) dist(x, sol)^z`.
pub fn weighted_cost_pow<S: Candidate + ?Sized>(data: &WeightedSet, sol: &S, z: f64) -> Result<f64> {
    let r = residuals_pow(&data.base, sol, z)?;
    Ok(r.iter().zip(&data.weights).map(|(a, w)| a * w).sum())
}

/// The l_z norm of the distances, `cost_pow^(1/z)`.
pub fn cost<S: Candidate + ?Sized>(data: &Dataset, sol: &S, z: f64) -> Result<f64> {
    Ok(pow_root(cost_pow(data, sol, z)?, z))
}

pub fn weighted_cost<S: Candidate + ?Sized>(data: &WeightedSet, sol: &S, z: f64) -> Result<f64> {
    Ok(pow_root(weighted_cost_pow(data, sol, z)?, z))
}

#[inline]
pub fn pow_root(value: f64, z: f64) -> f64 {
    if z == 1.0 {
        value
    } else if z == 2.0 {
        value.sqrt()
    } else {
        value.powf(1.0 / z)
    }
}
