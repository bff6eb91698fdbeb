//! How well the optimal cost survives a random projection.

use std::io::Write;

use anyhow::{ensure, Result};
use projclust::jl::JlMap;
use projclust::rng::derive_seed;
use projclust::solvers::solve;
use projclust::{Dataset, SolveReport, WeightedSet};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::plot::BandPoint;
use crate::stats::quantile;

/// Label mixed into the seed for solver restarts.
pub const SOLVER_LABEL: u64 = 0x5017;

#[derive(Debug, Clone, PartialEq)]
pub struct PreservationRecord {
    pub t: usize,
    pub trial: usize,
    pub cost_original: f64,
    /// Optimal cost on the projected data; `None` when solving failed.
    pub cost_projected: Option<f64>,
    pub ratio: Option<f64>,
    pub status: String,
    pub method: String,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreservationSummary {
    pub t: usize,
    pub completed: usize,
    pub trials: usize,
    pub median: Option<f64>,
    pub p05: Option<f64>,
    pub p95: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PreservationRun {
    pub original: Option<SolveReport>,
    pub records: Vec<PreservationRecord>,
    pub summaries: Vec<PreservationSummary>,
}

impl PreservationRun {
    /// Ratios of the completed trials at target dimension `t`.
    pub fn ratios(&self, t: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.t == t).filter_map(|r| r.ratio).collect()
    }

    pub fn band(&self) -> Vec<BandPoint> {
        self.summaries
            .iter()
            .filter_map(|s| {
                Some(BandPoint {
                    t: s.t as f64,
                    mid: s.median?,
                    lo: s.p05?,
                    hi: s.p95?,
                })
            })
            .collect()
    }
}

/// The random map of a trial: stream `trial + 1` of a seed derived from
/// `(seed, t)`.
pub fn trial_map(cfg: &ExperimentConfig, t: usize, trial: usize) -> Result<JlMap> {
    if cfg.identity {
        return Ok(JlMap::identity(cfg.d)?);
    }
    Ok(JlMap::sample_stream(cfg.d, t, derive_seed(cfg.seed, t as u64), trial as u64 + 1)?)
}

/// For every `t` and trial: project, solve, and compare with the optimum of
/// the original data. Both sides use the same solver seed, so projecting
/// with the identity reproduces the original optimum exactly.
pub fn run_preserve(cfg: &ExperimentConfig, data: &Dataset) -> Result<PreservationRun> {
    cfg.validate()?;
    ensure!(data.d() == cfg.d, "data has dimension {} but the configuration says d = {}", data.d(), cfg.d);
    let solver = cfg.solve_config(derive_seed(cfg.seed, SOLVER_LABEL));
    let original = solve(cfg.problem, &WeightedSet::uniform(data.clone()), &solver);
    let original_cost = original.as_ref().map_or(f64::NAN, |r| r.cost);

    let jobs: Vec<(usize, usize)> = cfg
        .t_list
        .iter()
        .flat_map(|&t| (0..cfg.trials).map(move |trial| (t, trial)))
        .collect();
    let records: Vec<PreservationRecord> = jobs
        .par_iter()
        .map(|&(t, trial)| {
            let outcome = match &original {
                Err(e) => Err(format!("original: {e}")),
                Ok(_) => trial_map(cfg, t, trial)
                    .map_err(|e| e.to_string())
                    .and_then(|map| map.apply(data).map_err(|e| e.to_string()))
                    .and_then(|px| solve(cfg.problem, &WeightedSet::uniform(px), &solver).map_err(|e| e.to_string())),
            };
            match outcome {
                Ok(rep) => PreservationRecord {
                    t,
                    trial,
                    cost_original: original_cost,
                    cost_projected: Some(rep.cost),
                    ratio: Some(rep.cost / original_cost),
                    status: "ok".into(),
                    method: rep.method.to_string(),
                    restarts: rep.restarts,
                },
                Err(msg) => PreservationRecord {
                    t,
                    trial,
                    cost_original: original_cost,
                    cost_projected: None,
                    ratio: None,
                    status: format!("failed: {msg}"),
                    method: String::new(),
                    restarts: 0,
                },
            }
        })
        .collect();

    let summaries = cfg
        .t_list
        .iter()
        .map(|&t| {
            let ratios: Vec<f64> = records.iter().filter(|r| r.t == t).filter_map(|r| r.ratio).collect();
            PreservationSummary {
                t,
                completed: ratios.len(),
                trials: cfg.trials,
                median: quantile(&ratios, 0.5),
                p05: quantile(&ratios, 0.05),
                p95: quantile(&ratios, 0.95),
            }
        })
        .collect();
    Ok(PreservationRun {
        original: original.ok(),
        records,
        summaries,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const PRESERVE_HEADER: [&str; 11] = [
    "row_type",
    "t",
    "trial",
    "cost_original",
    "cost_projected",
    "ratio",
    "p05",
    "p95",
    "status",
    "method",
    "restarts",
];

/// Trial rows in `(t, trial)` order followed by one summary row per `t`
/// (median ratio in the `ratio` column).
pub fn write_preserve_csv<W: Write>(run: &PreservationRun, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PRESERVE_HEADER)?;
    for r in &run.records {
        out.write_record([
            "trial".to_string(),
            r.t.to_string(),
            r.trial.to_string(),
            r.cost_original.to_string(),
            opt(r.cost_projected),
            opt(r.ratio),
            String::new(),
            String::new(),
            r.status.clone(),
            r.method.clone(),
            r.restarts.to_string(),
        ])?;
    }
    let cost_original = run.original.as_ref().map(|r| r.cost.to_string()).unwrap_or_default();
    for s in &run.summaries {
        out.write_record([
            "summary".to_string(),
            s.t.to_string(),
            String::new(),
            cost_original.clone(),
            String::new(),
            opt(s.median),
            opt(s.p05),
            opt(s.p95),
            format!("{}/{} ok", s.completed, s.trials),
            run.original.as_ref().map(|r| r.method.to_string()).unwrap_or_default(),
            run.original.as_ref().map(|r| r.restarts.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
