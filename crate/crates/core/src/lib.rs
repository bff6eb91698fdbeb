//! Random projections for clustering and projective clustering.
//!
//! The crate provides the geometry of the four problems ((k,z)-clustering,
//! subspace, flat and line approximation), Gaussian JL maps, sensitivity
//! functions and sensitivity-sampling coresets, 3-coresets for
//! `(k, inf)`-line approximation, reference solvers and lower-bound
//! instances for medoid and column subset selection.

pub mod coreset;
pub mod counterexamples;
pub mod error;
pub mod geometry;
pub mod io;
pub mod jl;
pub mod linalg;
pub mod rng;
pub mod sensitivity;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{
    assign, cost, cost_pow, project_flat, project_line, project_subspace, weighted_cost, weighted_cost_pow,
    Candidate, CenterSet, Dataset, Flat, Line, LineSet, Problem, Solution, Subspace, WeightedSet,
};
pub use jl::{apply, sample_jl, JlMap};
pub use solvers::{solve, MethodChoice, SolveConfig, SolveReport};
