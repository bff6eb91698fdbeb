//! Synthetic data sets.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, ensure, Result};
use projclust::counterexamples::Instance;
use projclust::linalg::gram_schmidt;
use projclust::rng::{self, StreamRng};
use projclust::{Dataset, Problem};
use rand::Rng;
use rand_distr::StandardNormal;

/// Standard deviation of cluster centers, line anchors and flat offsets.
const SPREAD: f64 = 5.0;
/// Standard deviation of positions along lines and flats.
const EXTENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    GaussianMixture,
    NearLines,
    NearFlat,
    /// A noisy `k`-dimensional linear subspace.
    NearSubspace,
    Medoid,
    Css,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::GaussianMixture => "gaussian-mixture",
            Kind::NearLines => "points-near-k-lines",
            Kind::NearFlat => "points-near-k-flat",
            Kind::NearSubspace => "points-near-k-subspace",
            Kind::Medoid => "medoid",
            Kind::Css => "css",
        }
    }

    /// The data family used for experiments on `problem`.
    pub fn for_problem(problem: Problem) -> Kind {
        match problem {
            Problem::Clustering => Kind::GaussianMixture,
            Problem::Subspace => Kind::NearSubspace,
            Problem::Flat => Kind::NearFlat,
            Problem::Lines => Kind::NearLines,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian-mixture" => Kind::GaussianMixture,
            "points-near-k-lines" => Kind::NearLines,
            "points-near-k-flat" => Kind::NearFlat,
            "points-near-k-subspace" => Kind::NearSubspace,
            "medoid" => Kind::Medoid,
            "css" => Kind::Css,
            other => bail!("unknown data kind '{other}'"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Standard deviation of the isotropic noise added to every point.
    pub noise: f64,
    pub seed: u64,
}

fn gaussian(r: &mut StreamRng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * r.sample::<f64, _>(StandardNormal)).collect()
}

fn add_noise(r: &mut StreamRng, x: &mut [f64], noise: f64) {
    if noise > 0.0 {
        for v in x {
            *v += noise * r.sample::<f64, _>(StandardNormal);
        }
    }
}

/// Orthonormal `k`-frame of random Gaussian vectors.
fn random_frame(r: &mut StreamRng, d: usize, k: usize) -> Vec<Vec<f64>> {
    loop {
        let vs: Vec<Vec<f64>> = (0..k).map(|_| gaussian(r, d, 1.0)).collect();
        let frame = gram_schmidt(&vs, 1e-8);
        if frame.len() == k {
            return frame;
        }
    }
}

/// Generates a data set; deterministic in `params.seed`. `medoid` and
/// `css` ignore everything but `n`.
pub fn generate(kind: Kind, p: &GenParams) -> Result<Dataset> {
    ensure!(p.n >= 1 && p.d >= 1 && p.k >= 1, "n, d and k must be >= 1");
    ensure!(p.noise >= 0.0 && p.noise.is_finite(), "noise must be a finite value >= 0");
    let mut r = rng::stream(p.seed, 0);
    let (n, d, k) = (p.n, p.d, p.k);
    let mut data = Vec::with_capacity(n * d);
    match kind {
        Kind::Medoid => return Ok(Instance::Medoid.generate(n)?),
        Kind::Css => return Ok(Instance::Css.generate(n)?),
        Kind::GaussianMixture => {
            let centers: Vec<Vec<f64>> = (0..k).map(|_| gaussian(&mut r, d, SPREAD)).collect();
            for _ in 0..n {
                let c = &centers[r.random_range(0..k)];
                let mut x = c.clone();
                add_noise(&mut r, &mut x, p.noise);
                data.extend(x);
            }
        }
        Kind::NearLines => {
            let lines: Vec<(Vec<f64>, Vec<f64>)> = (0..k)
                .map(|_| (gaussian(&mut r, d, SPREAD), random_frame(&mut r, d, 1).remove(0)))
                .collect();
            for _ in 0..n {
                let (a, u) = &lines[r.random_range(0..k)];
                let s: f64 = EXTENT * r.sample::<f64, _>(StandardNormal);
                let mut x: Vec<f64> = a.iter().zip(u).map(|(ai, ui)| ai + s * ui).collect();
                add_noise(&mut r, &mut x, p.noise);
                data.extend(x);
            }
        }
        Kind::NearFlat | Kind::NearSubspace => {
            ensure!(k < d, "flat dimension k = {k} must be smaller than d = {d}");
            let offset = if kind == Kind::NearFlat {
                gaussian(&mut r, d, SPREAD)
            } else {
                vec![0.0; d]
            };
            let frame = random_frame(&mut r, d, k);
            for _ in 0..n {
                let mut x = offset.clone();
                for u in &frame {
                    let s: f64 = EXTENT * r.sample::<f64, _>(StandardNormal);
                    x.iter_mut().zip(u).for_each(|(xi, ui)| *xi += s * ui);
                }
                add_noise(&mut r, &mut x, p.noise);
                data.extend(x);
            }
        }
    }
    Ok(Dataset::new(n, d, data)?)
}
