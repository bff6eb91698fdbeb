//! Counterexample trials over seeds.

use std::io::Write;

use anyhow::{ensure, Result};
use projclust::counterexamples::{counterexample_trial, Instance, RatioReport};
use rayon::prelude::*;

use crate::plot::BandPoint;
use crate::stats::{frequency, quantile};

/// Ratio above which a trial counts as a clear distortion.
pub fn threshold(which: Instance) -> f64 {
    match which {
        Instance::Medoid => 1.5,
        Instance::Css => 1.25,
    }
}

/// Trial `i` at each `t` uses seed `seed + i`.
pub fn run_counterexample(which: Instance, n: usize, t_list: &[usize], trials: usize, seed: u64) -> Result<Vec<RatioReport>> {
    ensure!(trials >= 1, "trials must be >= 1");
    ensure!(!t_list.is_empty(), "no target dimensions given");
    let jobs: Vec<(usize, u64)> = t_list
        .iter()
        .flat_map(|&t| (0..trials as u64).map(move |i| (t, seed.wrapping_add(i))))
        .collect();
    jobs.par_iter()
        .map(|&(t, s)| Ok(counterexample_trial(which, n, t, s)?))
        .collect()
}

/// Fraction of reports at target dimension `t` whose ratio reaches the
/// instance's threshold.
pub fn exceedance(reports: &[RatioReport], t: usize) -> f64 {
    let ratios: Vec<f64> = reports.iter().filter(|r| r.t == t).map(|r| r.ratio).collect();
    match reports.first() {
        Some(r) => frequency(&ratios, |v| v >= threshold(r.which)),
        None => 0.0,
    }
}

pub fn band(reports: &[RatioReport], t_list: &[usize]) -> Vec<BandPoint> {
    t_list
        .iter()
        .filter_map(|&t| {
            let ratios: Vec<f64> = reports.iter().filter(|r| r.t == t).map(|r| r.ratio).collect();
            Some(BandPoint {
                t: t as f64,
                mid: quantile(&ratios, 0.5)?,
                lo: quantile(&ratios, 0.05)?,
                hi: quantile(&ratios, 0.95)?,
            })
        })
        .collect()
}

pub fn write_counterexample_csv<W: Write>(reports: &[RatioReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RatioReport::CSV_HEADER.split(','))?;
    for r in reports {
        out.write_record([
            r.which.to_string(),
            r.n.to_string(),
            r.t.to_string(),
            r.seed.to_string(),
            r.cost_original.to_string(),
            r.cost_projected.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
