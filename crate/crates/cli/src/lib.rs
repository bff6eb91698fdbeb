//! Experiment harness: synthetic data, random projections, solver runs,
//! coreset quality, cost preservation sweeps and counterexample trials,
//! all written as CSV.
//!
//! Trials run in parallel. Every trial draws from its own random stream and
//! rows are assembled in trial order, so output bytes do not depend on the
//! number of threads.

pub mod config;
pub mod counter;
pub mod instances;
pub mod plot;
pub mod pool;
pub mod preserve;
pub mod quality;
pub mod stats;

pub use config::{preset_t, ExperimentConfig, Preset};
pub use instances::{generate, GenParams, Kind};
