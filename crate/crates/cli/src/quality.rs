//! Quality of sensitivity-sampling coresets before and after projection.

use std::io::Write;

use anyhow::{ensure, Result};
use projclust::coreset::{sensitivity_sample_stream, Coreset};
use projclust::rng::derive_seed;
use projclust::sensitivity::{sensitivity, SensitivityProfile};
use projclust::solvers::solve;
use projclust::{weighted_cost, Dataset, SolveReport, WeightedSet};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::preserve::{trial_map, SOLVER_LABEL};

/// Label mixed into the seed for coreset draws.
pub const CORESET_LABEL: u64 = 0xC0E5;

#[derive(Debug, Clone, PartialEq)]
pub struct QualityRecord {
    pub m: usize,
    pub trial: usize,
    pub t: usize,
    pub cost_full: f64,
    /// Optimal cost on the weighted coreset.
    pub cost_coreset: f64,
    /// `cost_coreset / cost_full`.
    pub ratio_before_projection: f64,
    /// Cost of the projected coreset over cost of the projected data, both
    /// for the optimum of the projected data.
    pub ratio_after_projection: f64,
}

#[derive(Debug, Clone)]
pub struct QualityRun {
    pub full: SolveReport,
    pub profile: SensitivityProfile,
    pub first_sample: Coreset,
    pub records: Vec<QualityRecord>,
}

/// Samples `cfg.trials` coresets of size `cfg.m` from the sensitivities of
/// the full-data optimum (or uniformly) and compares optima. Projection
/// uses the first entry of `cfg.t_list`.
pub fn run_quality(cfg: &ExperimentConfig, data: &Dataset, uniform: bool) -> Result<QualityRun> {
    cfg.validate()?;
    ensure!(data.d() == cfg.d, "data has dimension {} but the configuration says d = {}", data.d(), cfg.d);
    let solver = cfg.solve_config(derive_seed(cfg.seed, SOLVER_LABEL));
    let full = solve(cfg.problem, &WeightedSet::uniform(data.clone()), &solver)?;
    let profile = if uniform {
        SensitivityProfile::uniform(data.n())?
    } else {
        sensitivity(data, &full.solution, cfg.z)?
    };
    let t = cfg.t_list[0];
    let sample_seed = derive_seed(cfg.seed, CORESET_LABEL);

    let trials: Vec<(Coreset, QualityRecord)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(Coreset, QualityRecord)> {
            let sample = sensitivity_sample_stream(data, &profile, cfg.m, sample_seed, trial as u64 + 1)?;
            let on_sample = solve(cfg.problem, &sample.to_weighted_set(data)?, &solver)?;

            let map = trial_map(cfg, t, trial)?;
            let px = map.apply(data)?;
            let projected = solve(cfg.problem, &WeightedSet::uniform(px.clone()), &solver)?;
            let sample_cost = weighted_cost(&sample.to_weighted_set(&px)?, &projected.solution, cfg.z)?;
            let record = QualityRecord {
                m: cfg.m,
                trial,
                t,
                cost_full: full.cost,
                cost_coreset: on_sample.cost,
                ratio_before_projection: on_sample.cost / full.cost,
                ratio_after_projection: sample_cost / projected.cost,
            };
            Ok((sample, record))
        })
        .collect::<Result<_>>()?;
    let mut it = trials.into_iter();
    let (first_sample, first) = it.next().expect("trials >= 1");
    let records = std::iter::once(first).chain(it.map(|(_, r)| r)).collect();
    Ok(QualityRun {
        full,
        profile,
        first_sample,
        records,
    })
}

pub const QUALITY_HEADER: [&str; 7] = [
    "m",
    "trial",
    "t",
    "cost_full",
    "cost_coreset",
    "ratio_before_projection",
    "ratio_after_projection",
];

pub fn write_quality_csv<W: Write>(records: &[QualityRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(QUALITY_HEADER)?;
    for r in records {
        out.write_record([
            r.m.to_string(),
            r.trial.to_string(),
            r.t.to_string(),
            r.cost_full.to_string(),
            r.cost_coreset.to_string(),
            r.ratio_before_projection.to_string(),
            r.ratio_after_projection.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
