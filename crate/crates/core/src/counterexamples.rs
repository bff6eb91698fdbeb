//! Instances on which projecting to very few dimensions distorts the
//! optimal cost of 1-medoid and 1-column subset selection.
//!
//! * medoid: the standard basis `e_1, ..., e_n` of `R^n`; every data point
//!   as center costs `2(n - 1)`.
//! * column subset selection: `x_i = (e_{n+1} + e_i) / sqrt(2)` in
//!   `R^(n+1)`; every span of one point costs `3(n - 1) / 4`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::geometry::Dataset;
use crate::jl::{sample_jl, JlMap};
use crate::linalg::{dot, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instance {
    Medoid,
    Css,
}

impl Instance {
    pub fn as_str(self) -> &'static str {
        match self {
            Instance::Medoid => "medoid",
            Instance::Css => "css",
        }
    }

    /// Exact optimal cost of the generated instance with `n` points.
    pub fn original_cost(self, n: usize) -> f64 {
        let m = (n - 1) as f64;
        match self {
            Instance::Medoid => 2.0 * m,
            Instance::Css => 0.75 * m,
        }
    }

    pub fn generate(self, n: usize) -> Result<Dataset> {
        match self {
            Instance::Medoid => gen_medoid_instance(n),
            Instance::Css => gen_css_instance(n),
        }
    }

    pub fn evaluate(self, x: &Dataset) -> f64 {
        match self {
            Instance::Medoid => medoid_cost(x),
            Instance::Css => css_cost(x),
        }
    }

    /// Ambient dimension of the instance with `n` points.
    pub fn dim(self, n: usize) -> usize {
        match self {
            Instance::Medoid => n,
            Instance::Css => n + 1,
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Instance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "medoid" => Ok(Instance::Medoid),
            "css" => Ok(Instance::Css),
            other => Err(invalid(format!("unknown counterexample '{other}'"))),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("instance needs n >= 2 (got {n})")));
    }
    Ok(())
}

pub fn gen_medoid_instance(n: usize) -> Result<Dataset> {
    check_n(n)?;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0;
    }
    Dataset::new(n, n, data)
}

pub fn gen_css_instance(n: usize) -> Result<Dataset> {
    check_n(n)?;
    let d = n + 1;
    let mut data = vec![0.0; n * d];
    for i in 0..n {
        data[i * d + i] = FRAC_1_SQRT_2;
        data[i * d + n] = FRAC_1_SQRT_2;
    }
    Dataset::new(n, d, data)
}

/// `min_{c in X} sum_x ||x - c||^2`, evaluated for each candidate through
/// `sum ||x||^2 + n ||c||^2 - 2 <sum x, c>`.
pub fn medoid_cost(x: &Dataset) -> f64 {
    let n = x.n() as f64;
    let total_sq: f64 = x.rows().map(norm_sq).sum();
    let mut sum = vec![0.0; x.d()];
    for p in x.rows() {
        sum.iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    x.rows()
        .map(|c| (total_sq + n * norm_sq(c) - 2.0 * dot(&sum, c)).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

/// `min` over nonzero points `s` of `sum_x ||x||^2 - <x, s/||s||>^2`.
/// Zero when every point is zero.
pub fn css_cost(x: &Dataset) -> f64 {
    let total_sq: f64 = x.rows().map(norm_sq).sum();
    let best = x
        .rows()
        .filter_map(|s| {
            let ss = norm_sq(s);
            (ss > 0.0).then(|| {
                let captured: f64 = x.rows().map(|p| dot(p, s).powi(2)).sum::<f64>() / ss;
                (total_sq - captured).max(0.0)
            })
        })
        .fold(f64::INFINITY, f64::min);
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub which: Instance,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub cost_original: f64,
    pub cost_projected: f64,
    pub ratio: f64,
}

impl RatioReport {
    pub const CSV_HEADER: &'static str = "which,n,t,seed,cost_original,cost_projected,ratio";

    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.which, self.n, self.t, self.seed, self.cost_original, self.cost_projected, self.ratio
        )
    }
}

/// The instance's image under `map`, computed from the columns of the map
/// since every point has at most two nonzero coordinates. Agrees with
/// applying the map to the generated instance.
pub fn project_instance(which: Instance, n: usize, map: &JlMap) -> Result<Dataset> {
    check_n(n)?;
    if map.d() != which.dim(n) {
        return Err(Error::DimensionMismatch {
            expected: which.dim(n),
            got: map.d(),
        });
    }
    let t = map.t();
    let mut data = Vec::with_capacity(n * t);
    for i in 0..n {
        for r in 0..t {
            data.push(match which {
                Instance::Medoid => map.entry(r, i),
                Instance::Css => map.entry(r, i) * FRAC_1_SQRT_2 + map.entry(r, n) * FRAC_1_SQRT_2,
            });
        }
    }
    Dataset::new(n, t, data)
}

/// Projects the instance with a Gaussian map of target dimension `t`
/// drawn from `seed` and compares optimal costs.
pub fn counterexample_trial(which: Instance, n: usize, t: usize, seed: u64) -> Result<RatioReport> {
    check_n(n)?;
    let map = sample_jl(which.dim(n), t, seed)?;
    let projected = project_instance(which, n, &map)?;
    let cost_original = which.original_cost(n);
    let cost_projected = which.evaluate(&projected);
    Ok(RatioReport {
        which,
        n,
        t,
        seed,
        cost_original,
        cost_projected,
        ratio: cost_original / cost_projected,
    })
}
