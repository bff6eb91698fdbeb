//! Weighted 1-center: minimizes `sum_i w_i ||x_i - c||^z` over `c`.

use crate::linalg::{dist_sq, pow_from_sq};

/// Iterates closer than this to a data point are moved off it.
pub const PERTURBATION: f64 = 1e-12;
/// Relative improvement below which iterations stop.
pub const REL_TOL: f64 = 1e-10;
pub const MAX_ITERS: usize = 10_000;

pub fn center_cost(points: &[&[f64]], weights: &[f64], c: &[f64], z: f64) -> f64 {
    points.iter().zip(weights).map(|(x, w)| w * pow_from_sq(dist_sq(x, c), z)).sum()
}

pub fn weighted_mean(points: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    let d = points[0].len();
    let total: f64 = weights.iter().sum();
    let mut c = vec![0.0; d];
    for (x, w) in points.iter().zip(weights) {
        for (ci, xi) in c.iter_mut().zip(x.iter()) {
            *ci += w * xi;
        }
    }
    if total > 0.0 {
        c.iter_mut().for_each(|v| *v /= total);
    }
    c
}

/// Optimal center and its cost. The mean for `z = 2`; a Weiszfeld-type
/// fixed point iteration for `z < 2`; gradient descent with backtracking
/// for `z > 2`. Iterations are monotone, so the result never costs more
/// than the weighted mean.
pub fn optimal_center(points: &[&[f64]], weights: &[f64], z: f64) -> (Vec<f64>, bool) {
    assert!(!points.is_empty(), "optimal_center needs at least one point");
    let mean = weighted_mean(points, weights);
    if z == 2.0 || points.len() == 1 {
        return (mean, true);
    }
    if z < 2.0 {
        weiszfeld(points, weights, z, mean)
    } else {
        gradient_descent(points, weights, z, mean)
    }
}

fn weiszfeld(points: &[&[f64]], weights: &[f64], z: f64, start: Vec<f64>) -> (Vec<f64>, bool) {
    let d = start.len();
    let mut c = start;
    let mut f = center_cost(points, weights, &c, z);
    for _ in 0..MAX_ITERS {
        if f == 0.0 {
            return (c, true);
        }
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        for (x, w) in points.iter().zip(weights) {
            let rho = dist_sq(x, &c).sqrt().max(PERTURBATION);
            let a = w * rho.powf(z - 2.0);
            den += a;
            for (ni, xi) in num.iter_mut().zip(x.iter()) {
                *ni += a * xi;
            }
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let f_next = center_cost(points, weights, &next, z);
        if f_next >= f {
            return (c, true);
        }
        let improvement = f - f_next;
        c = next;
        f = f_next;
        if improvement <= REL_TOL * f {
            return (c, true);
        }
    }
    (c, false)
}

fn gradient_descent(points: &[&[f64]], weights: &[f64], z: f64, start: Vec<f64>) -> (Vec<f64>, bool) {
    let d = start.len();
    let mut c = start;
    let mut f = center_cost(points, weights, &c, z);
    let total: f64 = weights.iter().sum();
    let mut step = 1.0 / (z * total.max(f64::MIN_POSITIVE));
    for _ in 0..MAX_ITERS {
        let mut g = vec![0.0; d];
        for (x, w) in points.iter().zip(weights) {
            let r2 = dist_sq(x, &c);
            let a = w * z * pow_from_sq(r2, z - 2.0);
            for ((gi, ci), xi) in g.iter_mut().zip(&c).zip(x.iter()) {
                *gi += a * (ci - xi);
            }
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2 == 0.0 || f == 0.0 {
            return (c, true);
        }
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = c.iter().zip(&g).map(|(ci, gi)| ci - step * gi).collect();
            let fc = center_cost(points, weights, &cand, z);
            if fc <= f - 0.5 * step * g2 {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            return (c, true);
        };
        let improvement = f - fc;
        c = cand;
        f = fc;
        step *= 2.0;
        if improvement <= REL_TOL * f {
            return (c, true);
        }
    }
    (c, false)
}
