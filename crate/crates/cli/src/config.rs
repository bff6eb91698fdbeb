//! Experiment configuration and target-dimension presets.

use anyhow::{ensure, Result};
use projclust::solvers::{MethodChoice, SolveConfig};
use projclust::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub z: f64,
    pub t_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub method: MethodChoice,
    pub restarts: usize,
    /// Coreset size.
    pub m: usize,
    /// Noise level of generated data.
    pub noise: f64,
    /// Use the identity map instead of a random one (requires `t = d`).
    pub identity: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 1 && self.d >= 1 && self.k >= 1, "n, d and k must be >= 1");
        ensure!(self.trials >= 1, "trials must be >= 1");
        ensure!(self.restarts >= 1, "restarts must be >= 1");
        ensure!(self.m >= 1, "coreset size m must be >= 1");
        ensure!(self.z.is_finite() && self.z >= 1.0, "z must be >= 1");
        ensure!(!self.t_list.is_empty(), "no target dimensions given");
        for &t in &self.t_list {
            ensure!(t >= 1 && t <= self.d, "target dimension t = {t} must lie in [1, d = {}]", self.d);
            ensure!(!self.identity || t == self.d, "the identity map needs t = d");
        }
        Ok(())
    }

    pub fn solve_config(&self, seed: u64) -> SolveConfig {
        SolveConfig {
            k: self.k,
            z: self.z,
            method: self.method,
            restarts: self.restarts,
            seed,
        }
    }
}

/// A target dimension from a dimension-bound formula, with a readable
/// account of the formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub t: usize,
    pub formula: String,
}

/// `t = ceil(constant * f(k, z, eps, n))` clamped to `[1, d]`, where `f` is
/// the dimension bound for the problem (natural logarithms):
///
/// * clustering: `(ln k + z ln(1/eps)) / eps^2`
/// * subspace, `z = 2`: `k / eps^2`; flat, `z = 2`: `(k + 1) / eps^2`
/// * subspace or flat, other `z`: `z k^2 ln(k/eps) / eps^3`
/// * lines: `(k ln ln n + z + ln(1/eps)) / eps^3`
pub fn preset_t(problem: Problem, n: usize, d: usize, k: usize, z: f64, eps: f64, constant: f64) -> Result<Preset> {
    ensure!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    ensure!(constant > 0.0 && constant.is_finite(), "the preset constant must be positive");
    let kf = k as f64;
    let (raw, text) = match problem {
        Problem::Clustering => (
            (kf.ln() + z * (1.0 / eps).ln()) / (eps * eps),
            "(ln k + z ln(1/eps)) / eps^2",
        ),
        Problem::Subspace if z == 2.0 => (kf / (eps * eps), "k / eps^2"),
        Problem::Flat if z == 2.0 => ((kf + 1.0) / (eps * eps), "(k + 1) / eps^2"),
        Problem::Subspace | Problem::Flat => (
            z * kf * kf * (kf / eps).ln() / eps.powi(3),
            "z k^2 ln(k/eps) / eps^3",
        ),
        Problem::Lines => {
            let lnln = (n.max(3) as f64).ln().ln();
            ((kf * lnln + z + (1.0 / eps).ln()) / eps.powi(3), "(k ln ln n + z + ln(1/eps)) / eps^3")
        }
    };
    let t = ((constant * raw).ceil() as usize).clamp(1, d);
    Ok(Preset {
        t,
        formula: format!("t = min(d, ceil({constant} * {text})) with k={k}, z={z}, eps={eps}, n={n}: t = {t}"),
    })
}
