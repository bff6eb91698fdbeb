use rand::Rng;
use rayon::prelude::*;

use super::center::optimal_center;
use super::{check_common, check_restarts, Method, SolveReport};
use crate::error::{invalid, Result};
use crate::geometry::{Flat, Solution, Subspace, WeightedSet};
use crate::linalg::{dot, gram_schmidt, norm_sq, pow_from_sq, svd};
use crate::rng;

const REL_TOL: f64 = 1e-8;
const MAX_REFINE_ITERS: usize = 500;
const MAX_IRLS_ITERS: usize = 100;
const MAX_ALTERNATIONS: usize = 50;

/// Best `k`-dimensional subspace. Exact (spectral) for `z = 2`; otherwise
/// the best locally refined candidate among the `z = 2` optimum and spans
/// of `restarts` random `k`-subsets of the points.
pub fn solve_subspace(data: &WeightedSet, k: usize, z: f64, restarts: usize, seed: u64) -> Result<SolveReport> {
    check_common(data, k, z)?;
    check_rank(k, data.d())?;
    let rows = data.base.to_rows();
    let spectral = top_directions(&rows, &data.weights, k);
    if z == 2.0 {
        let s = Subspace::new(data.d(), spectral)?;
        return SolveReport::evaluate(data, Solution::Subspace(s), z, Method::Spectral, 1, true);
    }
    check_restarts(restarts)?;
    let (basis, _, converged) = (0..restarts + 1)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                spectral.clone()
            } else {
                random_span(&rows, &data.weights, k, z, &mut rng::stream(seed, r as u64))
            };
            refine_subspace(&rows, &data.weights, z, start)
        })
        .enumerate()
        .reduce_with(|a, b| if b.1 .1 < a.1 .1 || (b.1 .1 == a.1 .1 && b.0 < a.0) { b } else { a })
        .map(|(_, v)| v)
        .expect("at least one candidate");
    let s = Subspace::new(data.d(), basis)?;
    SolveReport::evaluate(data, Solution::Subspace(s), z, Method::Heuristic, restarts, converged)
}

/// Best `k`-dimensional affine flat. Exact for `z = 2` (weighted centering
/// and spectral decomposition); otherwise alternates between the direction
/// and the translation from several starting flats whose translations are
/// averages of small random subsets.
pub fn solve_flat(data: &WeightedSet, k: usize, z: f64, restarts: usize, seed: u64) -> Result<SolveReport> {
    check_common(data, k, z)?;
    check_rank(k, data.d())?;
    let rows = data.base.to_rows();
    let (dir, tau) = spectral_flat(&rows, &data.weights, k);
    if z == 2.0 {
        let f = Flat::new(Subspace::new(data.d(), dir)?, tau)?;
        return SolveReport::evaluate(data, Solution::Flat(f), z, Method::Spectral, 1, true);
    }
    check_restarts(restarts)?;
    let (basis, tau, _, converged) = (0..restarts + 1)
        .into_par_iter()
        .map(|r| {
            let (d0, t0) = if r == 0 {
                (dir.clone(), tau.clone())
            } else {
                random_flat(&rows, &data.weights, k, &mut rng::stream(seed, r as u64))
            };
            alternate_flat(&rows, &data.weights, z, d0, t0)
        })
        .enumerate()
        .reduce_with(|a, b| if b.1 .2 < a.1 .2 || (b.1 .2 == a.1 .2 && b.0 < a.0) { b } else { a })
        .map(|(_, v)| v)
        .expect("at least one candidate");
    let f = Flat::new(Subspace::new(data.d(), basis)?, tau)?;
    SolveReport::evaluate(data, Solution::Flat(f), z, Method::Heuristic, restarts, converged)
}

fn check_rank(k: usize, d: usize) -> Result<()> {
    if k >= d {
        return Err(invalid(format!("k = {k} must be smaller than the dimension d = {d}")));
    }
    Ok(())
}

/// Top `k` right singular vectors of the rows scaled by `sqrt(weight)`,
/// completed to `k` orthonormal vectors when the data has lower rank.
pub(crate) fn top_directions(rows: &[Vec<f64>], weights: &[f64], k: usize) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let scaled: Vec<f64> = rows
        .iter()
        .zip(weights)
        .flat_map(|(x, w)| {
            let s = w.sqrt();
            x.iter().map(move |v| v * s)
        })
        .collect();
    let s = svd(rows.len(), d, &scaled);
    complete(s.v.into_iter().take(k).collect(), k, d)
}

/// Orthonormalizes `vectors` and pads with coordinate axes up to `k`.
fn complete(vectors: Vec<Vec<f64>>, k: usize, d: usize) -> Vec<Vec<f64>> {
    let mut all = vectors;
    all.extend((0..d).map(|i| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    }));
    let mut basis = gram_schmidt(&all, 1e-10);
    basis.truncate(k);
    basis
}

fn residual_sq(basis: &[Vec<f64>], x: &[f64]) -> (f64, Vec<f64>) {
    let c: Vec<f64> = basis.iter().map(|u| dot(u, x)).collect();
    ((norm_sq(x) - norm_sq(&c)).max(0.0), c)
}

fn subspace_cost(rows: &[Vec<f64>], weights: &[f64], basis: &[Vec<f64>], z: f64) -> f64 {
    rows.iter()
        .zip(weights)
        .map(|(x, w)| w * pow_from_sq(residual_sq(basis, x).0, z))
        .sum()
}

fn random_span<R: Rng>(rows: &[Vec<f64>], weights: &[f64], k: usize, z: f64, r: &mut R) -> Vec<Vec<f64>> {
    let score: Vec<f64> = rows.iter().zip(weights).map(|(x, w)| w * pow_from_sq(norm_sq(x), z)).collect();
    let total: f64 = score.iter().sum();
    let picks: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let i = if total > 0.0 { draw(&score, total, r) } else { r.random_range(0..rows.len()) };
            rows[i].clone()
        })
        .collect();
    complete(picks, k, rows[0].len())
}

fn draw<R: Rng>(score: &[f64], total: f64, r: &mut R) -> usize {
    let mut u = r.random::<f64>() * total;
    for (i, s) in score.iter().enumerate() {
        if u < *s {
            return i;
        }
        u -= s;
    }
    score.iter().rposition(|s| *s > 0.0).unwrap_or(0)
}

/// Local refinement of a subspace: majorize-minimize reweighting for
/// `z < 2`, then projected gradient descent on the Grassmannian with step
/// halving. Returns the basis, its cost and whether the relative
/// improvement fell below tolerance.
fn refine_subspace(rows: &[Vec<f64>], weights: &[f64], z: f64, start: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64, bool) {
    let k = start.len();
    let d = rows[0].len();
    let mut basis = start;
    let mut f = subspace_cost(rows, weights, &basis, z);
    let floor = 1e-12 * rows.iter().map(|x| norm_sq(x).sqrt()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    if z < 2.0 {
        for _ in 0..MAX_IRLS_ITERS {
            if f == 0.0 {
                break;
            }
            let a: Vec<f64> = rows
                .iter()
                .zip(weights)
                .map(|(x, w)| w * residual_sq(&basis, x).0.sqrt().max(floor).powf(z - 2.0))
                .collect();
            let next = top_directions(rows, &a, k);
            let fn_ = subspace_cost(rows, weights, &next, z);
            if fn_ >= f {
                break;
            }
            let done = f - fn_ <= REL_TOL * fn_;
            basis = next;
            f = fn_;
            if done {
                break;
            }
        }
    }

    let mut step = f64::NAN;
    let mut converged = false;
    for _ in 0..MAX_REFINE_ITERS {
        if f == 0.0 {
            converged = true;
            break;
        }
        // Euclidean gradient of sum_i w_i r_i^z with respect to each basis row.
        let mut grad = vec![vec![0.0; d]; k];
        let mut scale = 0.0;
        for (x, w) in rows.iter().zip(weights) {
            let (r2, c) = residual_sq(&basis, x);
            let a = w * z * pow_from_sq(r2.max(floor * floor), z - 2.0);
            scale += a * norm_sq(x);
            for (g, cj) in grad.iter_mut().zip(&c) {
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi -= a * cj * xi;
                }
            }
        }
        // Tangent direction: remove components inside the subspace.
        for g in grad.iter_mut() {
            for u in &basis {
                let p = dot(g, u);
                for (gi, ui) in g.iter_mut().zip(u) {
                    *gi -= p * ui;
                }
            }
        }
        let gnorm: f64 = grad.iter().map(|g| norm_sq(g)).sum();
        if gnorm <= f64::EPSILON * f64::EPSILON * scale * scale {
            converged = true;
            break;
        }
        if step.is_nan() {
            step = 1.0 / scale.max(f64::MIN_POSITIVE);
        }
        let mut accepted = None;
        for _ in 0..60 {
            let moved: Vec<Vec<f64>> = basis
                .iter()
                .zip(&grad)
                .map(|(u, g)| u.iter().zip(g).map(|(ui, gi)| ui - step * gi).collect())
                .collect();
            let cand = gram_schmidt(&moved, 1e-10);
            if cand.len() == k {
                let fc = subspace_cost(rows, weights, &cand, z);
                if fc < f {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let done = f - fc <= REL_TOL * fc;
        basis = cand;
        f = fc;
        step *= 2.0;
        if done {
            converged = true;
            break;
        }
    }
    (basis, f, converged)
}

/// Weighted mean and the top directions of the centered data.
pub(crate) fn spectral_flat(rows: &[Vec<f64>], weights: &[f64], k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let tau = super::center::weighted_mean(&refs, weights);
    let centered = translate(rows, &tau);
    (top_directions(&centered, weights, k), tau)
}

fn translate(rows: &[Vec<f64>], tau: &[f64]) -> Vec<Vec<f64>> {
    rows.iter().map(|x| x.iter().zip(tau).map(|(a, b)| a - b).collect()).collect()
}

/// A start whose translation is the mean of up to `k + 1` random points
/// and whose direction spans their differences.
fn random_flat<R: Rng>(rows: &[Vec<f64>], weights: &[f64], k: usize, r: &mut R) -> (Vec<Vec<f64>>, Vec<f64>) {
    let total: f64 = weights.iter().sum();
    let picks: Vec<&[f64]> = (0..=k).map(|_| rows[draw(weights, total, r)].as_slice()).collect();
    let tau = super::center::weighted_mean(&picks, &vec![1.0; picks.len()]);
    let diffs: Vec<Vec<f64>> = picks.iter().map(|p| p.iter().zip(&tau).map(|(a, b)| a - b).collect()).collect();
    (complete(diffs, k, rows[0].len()), tau)
}

/// Alternates subspace refinement of the translated points with the
/// optimal translation for the current direction.
pub(crate) fn alternate_flat(
    rows: &[Vec<f64>],
    weights: &[f64],
    z: f64,
    dir: Vec<Vec<f64>>,
    tau: Vec<f64>,
) -> (Vec<Vec<f64>>, Vec<f64>, f64, bool) {
    let mut dir = dir;
    let mut tau = tau;
    let mut f = subspace_cost(&translate(rows, &tau), weights, &dir, z);
    for _ in 0..MAX_ALTERNATIONS {
        let (d_next, _, _) = refine_subspace(&translate(rows, &tau), weights, z, dir.clone());
        // Components orthogonal to the direction; the best translation is
        // their optimal center.
        let perp: Vec<Vec<f64>> = rows
            .iter()
            .map(|x| {
                let mut p = x.clone();
                for u in &d_next {
                    let c = dot(u, x);
                    p.iter_mut().zip(u).for_each(|(pi, ui)| *pi -= c * ui);
                }
                p
            })
            .collect();
        let refs: Vec<&[f64]> = perp.iter().map(Vec::as_slice).collect();
        let (t_next, _) = optimal_center(&refs, weights, z);
        let f_next = subspace_cost(&translate(rows, &t_next), weights, &d_next, z);
        if f_next >= f {
            return (dir, tau, f, true);
        }
        let done = f - f_next <= REL_TOL * f_next;
        dir = d_next;
        tau = t_next;
        f = f_next;
        if done {
            return (dir, tau, f, true);
        }
    }
    (dir, tau, f, false)
}
