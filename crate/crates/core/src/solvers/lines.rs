use rand::Rng;
use rayon::prelude::*;

use super::partition::{best_partition, members};
use super::subspace::{alternate_flat, spectral_flat};
use super::{check_common, check_restarts, Method, SolveReport};
use crate::error::{Error, Result};
use crate::geometry::{Line, LineSet, Solution, WeightedSet};
use crate::linalg::{dist_sq, pow_from_sq};
use crate::rng;

/// Largest `n` accepted by the exact line oracle.
pub const EXACT_LINES_MAX_N: usize = 12;
const MAX_ALTERNATIONS: usize = 100;

fn axis(d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[0] = 1.0;
    e
}

fn line_through(a: &[f64], b: &[f64]) -> Line {
    Line::through(a, b).unwrap_or_else(|_| Line::new(a.to_vec(), axis(a.len())).expect("unit direction"))
}

fn line_cost(rows: &[&[f64]], weights: &[f64], line: &Line, z: f64) -> f64 {
    rows.iter().zip(weights).map(|(x, w)| w * pow_from_sq(line.dist_sq(x), z)).sum()
}

/// Best single line for a weighted group: affine principal direction for
/// `z = 2`, refined by alternating minimization otherwise. Returns the line
/// and its cost.
pub fn fit_line(rows: &[&[f64]], weights: &[f64], z: f64) -> (Line, f64) {
    let d = rows[0].len();
    if rows.len() <= 2 || d == 1 {
        let line = line_through(rows[0], rows[rows.len() - 1]);
        let f = line_cost(rows, weights, &line, z);
        return (line, f);
    }
    let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let (mut dir, mut tau) = spectral_flat(&owned, weights, 1);
    if z != 2.0 {
        let (d2, t2, _, _) = alternate_flat(&owned, weights, z, dir, tau);
        dir = d2;
        tau = t2;
    }
    let line = Line::new(tau, dir.swap_remove(0)).expect("unit direction");
    let f = line_cost(rows, weights, &line, z);
    (line, f)
}

/// Optimum over partitions into at most `k` groups, each served by its
/// best line. Exact for `z = 2`.
pub fn solve_lines_exact(data: &WeightedSet, k: usize, z: f64) -> Result<SolveReport> {
    check_common(data, k, z)?;
    let n = data.n();
    if n > EXACT_LINES_MAX_N {
        return Err(Error::TooLarge {
            method: "exact lines",
            n,
            limit: EXACT_LINES_MAX_N,
        });
    }
    let k = k.min(n);
    let mut fitted = vec![None; 1 << n];
    let mut part_cost = vec![0.0; 1 << n];
    for mask in 1u32..(1 << n) {
        let idx = members(mask);
        let pts: Vec<&[f64]> = idx.iter().map(|&i| data.base.row(i)).collect();
        let w: Vec<f64> = idx.iter().map(|&i| data.weights[i]).collect();
        let (line, f) = fit_line(&pts, &w, z);
        part_cost[mask as usize] = f;
        fitted[mask as usize] = Some(line);
    }
    let (_, mut parts) = best_partition(n, k, &part_cost);
    parts.sort_unstable_by_key(|m| m.trailing_zeros());
    let lines = parts.iter().map(|&m| fitted[m as usize].clone().expect("fitted")).collect();
    SolveReport::evaluate(data, Solution::Lines(LineSet::new(lines)?), z, Method::Exact, 1, true)
}

/// Best of `restarts` runs of alternating minimization (assign each point
/// to its nearest line, refit every line on its group). Starting lines pass
/// through pairs of points drawn proportionally to their current cost.
pub fn solve_lines(data: &WeightedSet, k: usize, z: f64, restarts: usize, seed: u64) -> Result<SolveReport> {
    check_common(data, k, z)?;
    check_restarts(restarts)?;
    let (lines, _, converged) = (0..restarts)
        .into_par_iter()
        .map(|r| alternate(data, k, z, &mut rng::stream(seed, r as u64)))
        .enumerate()
        .reduce_with(|a, b| if b.1 .1 < a.1 .1 || (b.1 .1 == a.1 .1 && b.0 < a.0) { b } else { a })
        .map(|(_, v)| v)
        .expect("restarts >= 1");
    SolveReport::evaluate(
        data,
        Solution::Lines(LineSet::new(lines)?),
        z,
        Method::Heuristic,
        restarts,
        converged,
    )
}

fn nearest(lines: &[Line], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, l) in lines.iter().enumerate() {
        let s = l.dist_sq(x);
        if s < best.1 {
            best = (i, s);
        }
    }
    best
}

fn draw<R: Rng>(score: &[f64], r: &mut R) -> Option<usize> {
    let total: f64 = score.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let mut u = r.random::<f64>() * total;
    for (i, s) in score.iter().enumerate() {
        if u < *s {
            return Some(i);
        }
        u -= s;
    }
    score.iter().rposition(|s| *s > 0.0)
}

fn seed_lines<R: Rng>(data: &WeightedSet, k: usize, z: f64, r: &mut R) -> Vec<Line> {
    let x = &data.base;
    let mut lines: Vec<Line> = Vec::with_capacity(k);
    while lines.len() < k {
        let score: Vec<f64> = if lines.is_empty() {
            data.weights.clone()
        } else {
            x.rows()
                .zip(&data.weights)
                .map(|(p, w)| w * pow_from_sq(nearest(&lines, p).1, z))
                .collect()
        };
        let Some(a) = draw(&score, r) else { break };
        let pa = x.row(a);
        let partner: Vec<f64> = x.rows().zip(&data.weights).map(|(p, w)| w * pow_from_sq(dist_sq(p, pa), z)).collect();
        let b = draw(&partner, r).unwrap_or(a);
        lines.push(line_through(pa, x.row(b)));
    }
    if lines.is_empty() {
        lines.push(line_through(x.row(0), x.row(0)));
    }
    lines
}

fn alternate<R: Rng>(data: &WeightedSet, k: usize, z: f64, r: &mut R) -> (Vec<Line>, f64, bool) {
    let x = &data.base;
    let mut lines = seed_lines(data, k, z, r);
    let mut labels: Vec<usize> = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_ALTERNATIONS {
        let new_labels: Vec<usize> = x.rows().map(|p| nearest(&lines, p).0).collect();
        if new_labels == labels {
            converged = true;
            break;
        }
        labels = new_labels;
        let mut next = lines.clone();
        let mut empty = Vec::new();
        for (c, slot) in next.iter_mut().enumerate() {
            let idx: Vec<usize> = (0..x.n()).filter(|&i| labels[i] == c).collect();
            if idx.is_empty() {
                empty.push(c);
                continue;
            }
            let pts: Vec<&[f64]> = idx.iter().map(|&i| x.row(i)).collect();
            let w: Vec<f64> = idx.iter().map(|&i| data.weights[i]).collect();
            let (line, f) = fit_line(&pts, &w, z);
            if f <= line_cost(&pts, &w, slot, z) {
                *slot = line;
            }
        }
        for c in empty {
            // Line through the two points with the largest residuals.
            let mut res: Vec<(usize, f64)> = x.rows().enumerate().map(|(i, p)| (i, nearest(&next, p).1)).collect();
            res.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
            if res[0].1 > 0.0 {
                let b = res.get(1).map_or(res[0].0, |p| p.0);
                next[c] = line_through(x.row(res[0].0), x.row(b));
            }
        }
        lines = next;
    }
    let f = x
        .rows()
        .zip(&data.weights)
        .map(|(p, w)| w * pow_from_sq(nearest(&lines, p).1, z))
        .sum();
    (lines, f, converged)
}
