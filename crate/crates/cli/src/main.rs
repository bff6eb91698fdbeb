use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use experiments::config::{preset_t, ExperimentConfig};
use experiments::counter::{band, exceedance, run_counterexample, threshold, write_counterexample_csv};
use experiments::instances::{generate, GenParams, Kind};
use experiments::plot::ratio_chart;
use experiments::pool::with_threads;
use experiments::preserve::{run_preserve, write_preserve_csv};
use experiments::quality::{run_quality, write_quality_csv};
use projclust::counterexamples::Instance;
use projclust::io::{load_dataset, write_dataset};
use projclust::solvers::{solve, MethodChoice, SolveConfig, SolveReport};
use projclust::{sample_jl, Dataset, Problem, WeightedSet};

#[derive(Parser)]
#[command(name = "projclust", version, about = "Random projections for clustering and projective clustering")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic data set.
    Gen(GenArgs),
    /// Apply a Gaussian random projection to a data set.
    Project(ProjectArgs),
    /// Solve one problem on a data set.
    Solve(SolveArgs),
    /// Coreset quality before and after projection.
    Coreset(CoresetArgs),
    /// Optimal-cost ratio after projection, over target dimensions and trials.
    Preserve(PreserveArgs),
    /// Trials on the instances where projection to low dimension fails.
    Counterexample(CounterArgs),
}

#[derive(Args)]
struct GenArgs {
    /// gaussian-mixture, points-near-k-lines, points-near-k-flat,
    /// points-near-k-subspace, medoid or css
    kind: Kind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the t x d matrix in the data set format.
    #[arg(long)]
    map_out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2.0)]
    z: f64,
    #[arg(long, default_value = "auto")]
    method: MethodChoice,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Target dimensions: explicit, or a preset from `--eps`.
#[derive(Args, Clone)]
struct TargetArgs {
    #[arg(long, conflicts_with_all = ["t_list", "eps"])]
    t: Option<usize>,
    /// Comma-separated list of target dimensions.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
    t_list: Option<Vec<usize>>,
    /// Pick t from the dimension bound for this accuracy.
    #[arg(long)]
    eps: Option<f64>,
    /// Constant multiplying the preset bound.
    #[arg(long, default_value_t = 1.0)]
    t_const: f64,
}

/// Data: a file, or generated from the problem's default kind.
#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
}

#[derive(Args)]
struct CoresetArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample uniformly instead of by sensitivity.
    #[arg(long)]
    uniform: bool,
    /// Write the first sampled coreset (index, weight) here.
    #[arg(long)]
    sample_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PreserveArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Project with the identity (needs t = d).
    #[arg(long)]
    identity: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an SVG of median ratio against t.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct CounterArgs {
    /// medoid or css
    which: Instance,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    t_list: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_plot(path: &Path, title: &str, svg_points: &[experiments::plot::BandPoint]) -> Result<()> {
    std::fs::write(path, ratio_chart(title, svg_points)).with_context(|| format!("writing {}", path.display()))
}

fn load_or_generate(data: &DataArgs, problem: Problem, k: usize, seed: u64) -> Result<Dataset> {
    match &data.input {
        Some(p) => Ok(load_dataset(p).with_context(|| format!("reading {}", p.display()))?),
        None => generate(
            Kind::for_problem(problem),
            &GenParams {
                n: data.n,
                d: data.d,
                k,
                noise: data.noise,
                seed,
            },
        ),
    }
}

fn resolve_targets(target: &TargetArgs, problem: Problem, data: &Dataset, k: usize, z: f64) -> Result<Vec<usize>> {
    if let Some(t) = target.t {
        return Ok(vec![t]);
    }
    if let Some(list) = &target.t_list {
        return Ok(list.clone());
    }
    if let Some(eps) = target.eps {
        let preset = preset_t(problem, data.n(), data.d(), k, z, eps, target.t_const)?;
        eprintln!("{}", preset.formula);
        return Ok(vec![preset.t]);
    }
    bail!("give --t, --t-list or --eps")
}

/// Coreset size 1, no noise and a random map unless overridden.
fn experiment(solver: &SolverArgs, data: &Dataset, t_list: Vec<usize>, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        problem: solver.problem,
        n: data.n(),
        d: data.d(),
        k: solver.k,
        z: solver.z,
        t_list,
        trials,
        seed,
        method: solver.method,
        restarts: solver.restarts,
        m: 1,
        noise: 0.0,
        identity: false,
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let data = generate(
        a.kind,
        &GenParams {
            n: a.n,
            d: a.d,
            k: a.k,
            noise: a.noise,
            seed: a.seed,
        },
    )?;
    let mut w = sink(a.out.as_deref())?;
    write_dataset(&mut w, &data)?;
    w.flush()?;
    Ok(())
}

fn cmd_project(a: ProjectArgs) -> Result<()> {
    let data = load_dataset(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let map = sample_jl(data.d(), a.t, a.seed)?;
    if let Some(p) = &a.map_out {
        let matrix = Dataset::new(map.t(), map.d(), map.matrix().to_vec())?;
        let mut w = sink(Some(p))?;
        write_dataset(&mut w, &matrix)?;
        w.flush()?;
    }
    let mut w = sink(a.out.as_deref())?;
    write_dataset(&mut w, &map.apply(&data)?)?;
    w.flush()?;
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let data = load_dataset(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let cfg = SolveConfig {
        k: a.solver.k,
        z: a.solver.z,
        method: a.solver.method,
        restarts: a.solver.restarts,
        seed: a.seed,
    };
    let report = solve(a.solver.problem, &WeightedSet::uniform(data), &cfg)?;
    let mut w = sink(a.out.as_deref())?;
    writeln!(w, "{}", SolveReport::CSV_HEADER)?;
    writeln!(w, "{}", report.csv_record())?;
    w.flush()?;
    Ok(())
}

fn cmd_coreset(a: CoresetArgs) -> Result<()> {
    let data = load_or_generate(&a.data, a.solver.problem, a.solver.k, a.seed)?;
    let t_list = resolve_targets(&a.target, a.solver.problem, &data, a.solver.k, a.solver.z)?;
    let cfg = ExperimentConfig {
        m: a.m,
        noise: a.data.noise,
        ..experiment(&a.solver, &data, t_list, a.trials, a.seed)
    };
    let run = run_quality(&cfg, &data, a.uniform)?;
    if let Some(p) = &a.sample_out {
        let mut w = sink(Some(p))?;
        run.first_sample.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut w = sink(a.out.as_deref())?;
    write_quality_csv(&run.records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_preserve(a: PreserveArgs) -> Result<()> {
    let data = load_or_generate(&a.data, a.solver.problem, a.solver.k, a.seed)?;
    let t_list = resolve_targets(&a.target, a.solver.problem, &data, a.solver.k, a.solver.z)?;
    let cfg = ExperimentConfig {
        noise: a.data.noise,
        identity: a.identity,
        ..experiment(&a.solver, &data, t_list, a.trials, a.seed)
    };
    let run = run_preserve(&cfg, &data)?;
    let mut w = sink(a.out.as_deref())?;
    write_preserve_csv(&run, &mut w)?;
    w.flush()?;
    if let Some(p) = &a.plot {
        write_plot(p, &format!("{} k={} z={}", cfg.problem, cfg.k, cfg.z), &run.band())?;
    }
    let failed = run.records.iter().filter(|r| r.ratio.is_none()).count();
    if failed > 0 {
        eprintln!("{failed} of {} trials failed to solve; see the status column", run.records.len());
    }
    Ok(())
}

fn cmd_counterexample(a: CounterArgs) -> Result<()> {
    let reports = run_counterexample(a.which, a.n, &a.t_list, a.trials, a.seed)?;
    let mut w = sink(a.out.as_deref())?;
    write_counterexample_csv(&reports, &mut w)?;
    w.flush()?;
    for &t in &a.t_list {
        eprintln!(
            "{} n={} t={t}: ratio >= {} in {:.3} of {} trials",
            a.which,
            a.n,
            threshold(a.which),
            exceedance(&reports, t),
            a.trials
        );
    }
    if let Some(p) = &a.plot {
        write_plot(p, &format!("{} n={}", a.which, a.n), &band(&reports, &a.t_list))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Project(a) => cmd_project(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Coreset(a) => cmd_coreset(a),
        Cmd::Preserve(a) => cmd_preserve(a),
        Cmd::Counterexample(a) => cmd_counterexample(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_threads(|| run(cli)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
