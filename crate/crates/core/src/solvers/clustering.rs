use rand::Rng;
use rayon::prelude::*;

use super::center::optimal_center;
use super::partition::{best_partition, members};
use super::{check_common, check_restarts, Method, SolveReport};
use crate::error::{Error, Result};
use crate::geometry::{CenterSet, Solution, WeightedSet};
use crate::linalg::{dist_sq, pow_from_sq};
use crate::rng;

/// Largest `n` accepted by the exact clustering oracle.
pub const EXACT_CLUSTERING_MAX_N: usize = 14;
const MAX_LLOYD_ITERS: usize = 300;

/// Optimum over all partitions into at most `k` parts, each served by its
/// optimal center.
pub fn solve_clustering_exact(data: &WeightedSet, k: usize, z: f64) -> Result<SolveReport> {
    check_common(data, k, z)?;
    let n = data.n();
    if n > EXACT_CLUSTERING_MAX_N {
        return Err(Error::TooLarge {
            method: "exact clustering",
            n,
            limit: EXACT_CLUSTERING_MAX_N,
        });
    }
    let k = k.min(n);
    let mut converged = true;
    let mut centers = vec![Vec::new(); 1 << n];
    let mut part_cost = vec![0.0; 1 << n];
    for mask in 1u32..(1 << n) {
        let idx = members(mask);
        let pts: Vec<&[f64]> = idx.iter().map(|&i| data.base.row(i)).collect();
        let w: Vec<f64> = idx.iter().map(|&i| data.weights[i]).collect();
        let (c, ok) = optimal_center(&pts, &w, z);
        converged &= ok;
        part_cost[mask as usize] = pts.iter().zip(&w).map(|(p, wi)| wi * pow_from_sq(dist_sq(p, &c), z)).sum();
        centers[mask as usize] = c;
    }
    let (_, mut parts) = best_partition(n, k, &part_cost);
    parts.sort_unstable_by_key(|m| m.trailing_zeros());
    let chosen = parts.iter().map(|&m| centers[m as usize].clone()).collect();
    SolveReport::evaluate(data, Solution::Centers(CenterSet::new(chosen)?), z, Method::Exact, 1, converged)
}

/// Best of `restarts` runs of D^z seeding followed by Lloyd iterations with
/// optimal per-cluster centers. Restart `r` uses random stream `r` of
/// `seed`; ties are broken by the lower restart index.
pub fn solve_clustering_heuristic(data: &WeightedSet, k: usize, z: f64, restarts: usize, seed: u64) -> Result<SolveReport> {
    check_common(data, k, z)?;
    check_restarts(restarts)?;
    let (centers, _, converged) = (0..restarts)
        .into_par_iter()
        .map(|r| lloyd(data, k, z, &mut rng::stream(seed, r as u64)))
        .enumerate()
        .map(|(r, (c, f, ok))| (r, c, f, ok))
        .reduce_with(|a, b| if b.2 < a.2 || (b.2 == a.2 && b.0 < a.0) { b } else { a })
        .map(|(_, c, f, ok)| (c, f, ok))
        .expect("restarts >= 1");
    SolveReport::evaluate(
        data,
        Solution::Centers(CenterSet::new(centers)?),
        z,
        Method::Heuristic,
        restarts,
        converged,
    )
}

fn nearest(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let s = dist_sq(x, c);
        if s < best.1 {
            best = (i, s);
        }
    }
    best
}

/// D^z sampling: the next center is a point drawn with probability
/// proportional to `w(x) dist(x, centers)^z`.
fn seed_centers<R: Rng>(data: &WeightedSet, k: usize, z: f64, r: &mut R) -> Vec<Vec<f64>> {
    let n = data.n();
    let total: f64 = data.weights.iter().sum();
    let first = pick(&data.weights, total, r);
    let mut centers = vec![data.base.row(first).to_vec()];
    let mut d2: Vec<f64> = data.base.rows().map(|x| dist_sq(x, &centers[0])).collect();
    while centers.len() < k.min(n) {
        let score: Vec<f64> = d2.iter().zip(&data.weights).map(|(s, w)| w * pow_from_sq(*s, z)).collect();
        let sum: f64 = score.iter().sum();
        if sum <= 0.0 {
            break;
        }
        let i = pick(&score, sum, r);
        let c = data.base.row(i).to_vec();
        for (s, x) in d2.iter_mut().zip(data.base.rows()) {
            *s = s.min(dist_sq(x, &c));
        }
        centers.push(c);
    }
    centers
}

fn pick<R: Rng>(score: &[f64], sum: f64, r: &mut R) -> usize {
    let mut u = r.random::<f64>() * sum;
    for (i, s) in score.iter().enumerate() {
        if u < *s {
            return i;
        }
        u -= s;
    }
    score.iter().rposition(|s| *s > 0.0).unwrap_or(0)
}

fn lloyd<R: Rng>(data: &WeightedSet, k: usize, z: f64, r: &mut R) -> (Vec<Vec<f64>>, f64, bool) {
    let mut centers = seed_centers(data, k, z, r);
    let mut labels: Vec<usize> = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_LLOYD_ITERS {
        let assignment: Vec<(usize, f64)> = data.base.rows().map(|x| nearest(&centers, x)).collect();
        let new_labels: Vec<usize> = assignment.iter().map(|a| a.0).collect();
        if new_labels == labels {
            converged = true;
            break;
        }
        labels = new_labels;
        let mut next = Vec::with_capacity(centers.len());
        for (c, center) in centers.iter().enumerate() {
            let idx: Vec<usize> = (0..data.n()).filter(|&i| labels[i] == c).collect();
            if idx.is_empty() {
                next.push(center.clone());
                continue;
            }
            let pts: Vec<&[f64]> = idx.iter().map(|&i| data.base.row(i)).collect();
            let w: Vec<f64> = idx.iter().map(|&i| data.weights[i]).collect();
            next.push(optimal_center(&pts, &w, z).0);
        }
        reseed_empty(data, &labels, &mut next);
        centers = next;
    }
    let cost = data
        .base
        .rows()
        .zip(&data.weights)
        .map(|(x, w)| w * pow_from_sq(nearest(&centers, x).1, z))
        .sum();
    (centers, cost, converged)
}

/// Moves each center without points onto the point with the largest
/// current residual.
fn reseed_empty(data: &WeightedSet, labels: &[usize], centers: &mut [Vec<f64>]) {
    let mut used = vec![false; centers.len()];
    for &l in labels {
        used[l] = true;
    }
    for c in 0..centers.len() {
        if used[c] {
            continue;
        }
        let far = data
            .base
            .rows()
            .enumerate()
            .map(|(i, x)| (i, nearest(centers, x).1))
            .fold((0, -1.0), |b, cur| if cur.1 > b.1 { cur } else { b });
        if far.1 > 0.0 {
            centers[c] = data.base.row(far.0).to_vec();
        }
        used[c] = true;
    }
}
