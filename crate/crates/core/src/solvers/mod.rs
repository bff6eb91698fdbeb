//! Reference optimizers: exact oracles at tiny sizes, spectral solutions
//! for `z = 2` and multi-restart heuristics otherwise.
//!
//! Every solver takes a [`WeightedSet`], so the same code solves full data
//! sets and weighted coresets. Reported costs are always re-evaluated from
//! the returned solution.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::geometry::{check_z, pow_root, weighted_cost_pow, Problem, Solution, WeightedSet};

pub mod center;
mod clustering;
mod lines;
mod partition;
mod subspace;

pub use clustering::{solve_clustering_exact, solve_clustering_heuristic, EXACT_CLUSTERING_MAX_N};
pub use lines::{fit_line, solve_lines, solve_lines_exact, EXACT_LINES_MAX_N};
pub use subspace::{solve_flat, solve_subspace};

/// How a reported solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exhaustive partition enumeration.
    Exact,
    /// Closed form via a singular value decomposition.
    Spectral,
    /// Best of several local searches.
    Heuristic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Spectral => "spectral",
            Method::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Requested solver family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Exact or spectral when available at this size, heuristic otherwise.
    #[default]
    Auto,
    Exact,
    Heuristic,
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "exact" => Ok(MethodChoice::Exact),
            "heuristic" => Ok(MethodChoice::Heuristic),
            other => Err(invalid(format!("unknown solver method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Solution,
    pub cost: f64,
    pub cost_pow: f64,
    pub method: Method,
    pub restarts: usize,
    pub converged: bool,
}

impl SolveReport {
    /// Builds a report whose costs are evaluated from `solution`.
    pub fn evaluate(
        data: &WeightedSet,
        solution: Solution,
        z: f64,
        method: Method,
        restarts: usize,
        converged: bool,
    ) -> Result<Self> {
        let cost_pow = weighted_cost_pow(data, &solution, z)?;
        Ok(Self {
            solution,
            cost: pow_root(cost_pow, z),
            cost_pow,
            method,
            restarts,
            converged,
        })
    }

    pub const CSV_HEADER: &'static str = "problem,cost,cost_pow,method,restarts,converged";

    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.solution.problem(),
            self.cost,
            self.cost_pow,
            self.method,
            self.restarts,
            self.converged
        )
    }
}

/// Settings shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub k: usize,
    pub z: f64,
    pub method: MethodChoice,
    pub restarts: usize,
    pub seed: u64,
}

impl SolveConfig {
    pub fn new(k: usize, z: f64) -> Self {
        Self {
            k,
            z,
            method: MethodChoice::Auto,
            restarts: 10,
            seed: 0,
        }
    }
}

pub(crate) fn check_common(data: &WeightedSet, k: usize, z: f64) -> Result<()> {
    check_z(z)?;
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    if data.n() == 0 {
        return Err(invalid("empty data set"));
    }
    Ok(())
}

pub(crate) fn check_restarts(restarts: usize) -> Result<()> {
    if restarts == 0 {
        return Err(invalid("restarts must be >= 1"));
    }
    Ok(())
}

/// Dispatches to the solver for `problem`.
pub fn solve(problem: Problem, data: &WeightedSet, cfg: &SolveConfig) -> Result<SolveReport> {
    let SolveConfig {
        k,
        z,
        method,
        restarts,
        seed,
    } = *cfg;
    match problem {
        Problem::Clustering => match method {
            MethodChoice::Exact => solve_clustering_exact(data, k, z),
            MethodChoice::Auto if data.n() <= EXACT_CLUSTERING_MAX_N => solve_clustering_exact(data, k, z),
            _ => solve_clustering_heuristic(data, k, z, restarts, seed),
        },
        Problem::Subspace => {
            refuse_exact_general_z(method, z, problem)?;
            solve_subspace(data, k, z, restarts, seed)
        }
        Problem::Flat => {
            refuse_exact_general_z(method, z, problem)?;
            solve_flat(data, k, z, restarts, seed)
        }
        Problem::Lines => match method {
            MethodChoice::Exact => solve_lines_exact(data, k, z),
            MethodChoice::Auto if data.n() <= EXACT_LINES_MAX_N => solve_lines_exact(data, k, z),
            _ => solve_lines(data, k, z, restarts, seed),
        },
    }
}

fn refuse_exact_general_z(method: MethodChoice, z: f64, problem: Problem) -> Result<()> {
    if method == MethodChoice::Exact && z != 2.0 {
        return Err(invalid(format!("no exact {problem} solver for z = {z}; use heuristic")));
    }
    Ok(())
}
