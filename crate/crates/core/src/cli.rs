//! The `efect` command line.
//!
//! Every command writes one JSON document to standard output and a short
//! human summary to standard error. Exit codes: 0 on success or a
//! reproduced verdict, 1 when the method says no (not reproduced, budget
//! exhausted, self-test did not settle), 2 on usage or data errors.
//!
//! Randomness is keyed by `--seed` only. Model runs use the seed directly,
//! so `simulate --seed 7` and `grow --seed 7` produce the same runs. Half
//! selection and split draws use a seed derived from it; `report` and
//! `verify` derive theirs the same way, so verifying a report against its
//! own sample with the same seed compares the reported half with itself.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::distribution::DistributionSpec;
use crate::ecf::EcfConfig;
use crate::error::{Error, Result};
use crate::harness::{lookup, ModelSpec};
use crate::metric::compare_samples_detailed;
use crate::report::{build_report, read_report, read_sample, write_report, write_sample};
use crate::repro::{
    grow_to_convergence, meets_convergence_point, sample_error_distribution, ErrorStats, GrowthConfig,
    HistoryPoint, ReproConfig,
};
use crate::rng::{derive_seed, stream_rng, StreamRng};
use crate::sample::SimulationSample;
use crate::verify::verify_report;

#[derive(Debug, Parser)]
#[command(name = "efect", version, about = "Reproducibility testing for stochastic simulation results")]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a built-in model and write a sample file.
    Simulate(SimulateArgs),
    /// Run the reproducibility self-test on a sample file.
    Repro(ReproArgs),
    /// Grow a model's sample until it meets the convergence point; write sample and report.
    Grow(GrowArgs),
    /// Build a report from an accepted sample file.
    Report(ReportArgs),
    /// Check a sample (or a fresh model run) against a report.
    Verify(VerifyArgs),
    /// EFECT error between two sample files.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in model id.
    #[arg(long)]
    pub model: String,
    /// Override a parameter, initial value, species count or rate (NAME=VALUE).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub overrides: Vec<String>,
    /// Scale the location and spread of a sampled input (NAME=FACTOR).
    #[arg(long = "scale-input", value_name = "NAME=FACTOR")]
    pub scale_inputs: Vec<String>,
    /// Output times, comma separated (default: the model's own).
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    /// Periods covered by each ECF grid.
    #[arg(long, default_value_t = 3.0)]
    pub m: f64,
    /// Points per ECF grid.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Relative change of the running mean error that ends the self-test.
    #[arg(long = "rel-tol", default_value_t = 1e-3)]
    pub rel_tol: f64,
    /// Convergence threshold for mean + 3 stdev.
    #[arg(long, default_value_t = 0.075)]
    pub target: f64,
    #[arg(long = "min-evals", default_value_t = 10)]
    pub min_evals: usize,
    #[arg(long = "max-evals", default_value_t = 10_000)]
    pub max_evals: usize,
}

impl TestArgs {
    fn config(&self) -> Result<ReproConfig> {
        let c = ReproConfig {
            rel_tol: self.rel_tol,
            min_evals: self.min_evals,
            max_evals: self.max_evals,
            target_threshold: self.target,
            ecf: EcfConfig::new(self.m, self.k)?,
            ..ReproConfig::default()
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of runs.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(long)]
    pub sample: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Round the sample to this many significant figures first.
    #[arg(long)]
    pub sigfigs: Option<u32>,
    #[command(flatten)]
    pub test: TestArgs,
}

#[derive(Debug, Args)]
pub struct GrowArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    /// Largest sample size that may be simulated.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long = "initial-size", default_value_t = 100)]
    pub initial_size: usize,
    /// Significant figures of the reported results.
    #[arg(long, default_value_t = 6)]
    pub sigfigs: u32,
    /// Where to write the accepted sample.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the report.
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub test: TestArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub sample: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub sigfigs: u32,
    /// Model whose sampled inputs are recorded in the report.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub test: TestArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub report: PathBuf,
    /// Curator sample file; omit to simulate `--model` at the reported size.
    #[arg(long, conflicts_with = "model")]
    pub sample: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long = "scale-input", value_name = "NAME=FACTOR")]
    pub scale_inputs: Vec<String>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long = "rel-tol", default_value_t = 1e-3)]
    pub rel_tol: f64,
    #[arg(long = "max-evals", default_value_t = 10_000)]
    pub max_evals: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    pub m: f64,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => Err(Error::InvalidArgument(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Repro(a) => cmd_repro(a, out, err),
        Command::Grow(a) => cmd_grow(a, out, err),
        Command::Report(a) => cmd_report(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Compare(a) => cmd_compare(a, out, err),
    }
}

/// Generator for half selection and split draws.
fn analysis_rng(seed: u64, stream: u64) -> StreamRng {
    stream_rng(derive_seed(seed, 1), stream)
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Schema(e.to_string()))?;
    writeln!(out, "{text}").map_err(|source| Error::Io { path: "<stdout>".into(), source })
}

fn parse_pair(text: &str) -> Result<(String, f64)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("expected NAME=VALUE, got {text:?}")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("not a number in {text:?}")))?;
    Ok((name.trim().to_string(), value))
}

fn configure_model(id: &str, overrides: &[String], scales: &[String]) -> Result<(ModelSpec, Vec<f64>)> {
    let entry = lookup(id)?;
    let mut spec = entry.spec;
    for o in overrides {
        let (name, value) = parse_pair(o)?;
        spec.set_value(&name, value)?;
    }
    for s in scales {
        let (name, factor) = parse_pair(s)?;
        spec.scale_input(&name, factor)?;
    }
    Ok((spec, entry.default_times))
}

fn resolve_model(a: &ModelArgs) -> Result<(ModelSpec, Vec<f64>)> {
    let (spec, default_times) = configure_model(&a.model, &a.overrides, &a.scale_inputs)?;
    Ok((spec, a.times.clone().unwrap_or(default_times)))
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    run_count: usize,
    variable_names: &'a [String],
    simulation_times: &'a [f64],
    out: &'a Path,
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let (spec, times) = resolve_model(&a.model)?;
    let sample = spec.simulate(a.n, &times, a.seed)?;
    write_sample(&sample, &a.out)?;
    let _ = writeln!(err, "wrote {} runs to {}", sample.run_count(), a.out.display());
    emit(
        out,
        &SimulateOutput {
            run_count: sample.run_count(),
            variable_names: sample.variable_names(),
            simulation_times: sample.times(),
            out: &a.out,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct StatsOutput {
    mean: f64,
    stdev: f64,
    count: usize,
    sample_size: usize,
    converged: bool,
    meets_target: bool,
}

impl StatsOutput {
    fn new(stats: &ErrorStats, converged: bool, config: &ReproConfig) -> Self {
        Self {
            mean: stats.mean,
            stdev: stats.stdev,
            count: stats.count,
            sample_size: stats.sample_size,
            converged,
            meets_target: converged && meets_convergence_point(stats, config),
        }
    }
}

/// Self-test that reports an unsettled running mean instead of failing.
fn self_test(sample: &SimulationSample, config: &ReproConfig, rng: &mut StreamRng) -> Result<(ErrorStats, bool)> {
    match sample_error_distribution(sample, config, rng) {
        Ok(s) => Ok((s, true)),
        Err(Error::NotConverged { partial }) => Ok((partial, false)),
        Err(e) => Err(e),
    }
}

fn cmd_repro(a: ReproArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = a.test.config()?;
    let mut sample = read_sample(&a.sample)?;
    if let Some(s) = a.sigfigs {
        sample = sample.round_sigfigs(s)?;
    }
    let (stats, converged) = self_test(&sample, &config, &mut analysis_rng(a.seed, 1))?;
    let result = StatsOutput::new(&stats, converged, &config);
    let _ = writeln!(
        err,
        "{} runs: mean {:.6} stdev {:.6} over {} evaluations{}",
        stats.sample_size,
        stats.mean,
        stats.stdev,
        stats.count,
        if converged { "" } else { " (running mean did not settle)" }
    );
    emit(out, &result)?;
    Ok(if converged { 0 } else { 1 })
}

#[derive(Serialize)]
struct HistoryRow {
    size: usize,
    mean: f64,
    stdev: f64,
    count: usize,
    upper: f64,
    converged: bool,
}

fn history_rows(history: &[HistoryPoint], config: &ReproConfig) -> Vec<HistoryRow> {
    history
        .iter()
        .map(|h| HistoryRow {
            size: h.size,
            mean: h.stats.mean,
            stdev: h.stats.stdev,
            count: h.stats.count,
            upper: h.stats.upper_statistic(config.target_multiplier),
            converged: h.converged,
        })
        .collect()
}

fn print_history(err: &mut dyn Write, rows: &[HistoryRow]) {
    let _ = writeln!(err, "{:>8} {:>12} {:>12} {:>12}", "size", "mean", "stdev", "mean+3sd");
    for r in rows {
        let _ = writeln!(err, "{:>8} {:>12.6} {:>12.6} {:>12.6}", r.size, r.mean, r.stdev, r.upper);
    }
}

#[derive(Serialize)]
struct GrowOutput<'a> {
    accepted: bool,
    sample_size: Option<usize>,
    history: Vec<HistoryRow>,
    sample: Option<&'a Path>,
    report: Option<&'a Path>,
}

fn cmd_grow(a: GrowArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = a.test.config()?;
    let (spec, times) = resolve_model(&a.model)?;
    crate::sample::check_sigfigs(a.sigfigs)?;
    let growth = GrowthConfig { initial_size: a.initial_size, max_size: a.budget, ..GrowthConfig::default() };
    // runs are rounded as they are produced, so the self-tests see the reported values
    let generate = |first, count| {
        spec.simulate_range(first, count, &times, a.seed)
            .and_then(|s| s.round_sigfigs(a.sigfigs))
    };
    let outcome = match grow_to_convergence(generate, &config, &growth, &mut analysis_rng(a.seed, 1)) {
        Ok(o) => o,
        Err(Error::BudgetExceeded { budget, history }) => {
            let rows = history_rows(&history, &config);
            print_history(err, &rows);
            let _ = writeln!(err, "budget of {budget} runs exhausted before the convergence point");
            emit(out, &GrowOutput { accepted: false, sample_size: None, history: rows, sample: None, report: None })?;
            return Ok(1);
        }
        Err(e) => return Err(e),
    };
    let rows = history_rows(&outcome.history, &config);
    print_history(err, &rows);

    let sample = outcome.sample;
    let report = build_report(
        &sample,
        &outcome.stats,
        config.ecf,
        spec.input_sampling(),
        a.sigfigs,
        &mut analysis_rng(a.seed, 0),
    )?;
    write_sample(&sample, &a.out)?;
    write_report(&report, &a.report)?;
    let _ = writeln!(err, "accepted {} runs; wrote {} and {}", sample.run_count(), a.out.display(), a.report.display());
    emit(
        out,
        &GrowOutput {
            accepted: true,
            sample_size: Some(sample.run_count()),
            history: rows,
            sample: Some(&a.out),
            report: Some(&a.report),
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ReportOutput<'a> {
    #[serde(flatten)]
    stats: StatsOutput,
    out: &'a Path,
}

fn cmd_report(a: ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = a.test.config()?;
    let input_sampling: Vec<DistributionSpec> = match &a.model {
        Some(id) => lookup(id)?.spec.input_sampling(),
        None => Vec::new(),
    };
    let sample = read_sample(&a.sample)?.round_sigfigs(a.sigfigs)?;
    let (stats, converged) = self_test(&sample, &config, &mut analysis_rng(a.seed, 1))?;
    if !converged {
        let _ = writeln!(err, "self-test did not settle after {} evaluations; no report written", stats.count);
        emit(out, &StatsOutput::new(&stats, false, &config))?;
        return Ok(1);
    }
    let report = build_report(&sample, &stats, config.ecf, input_sampling, a.sigfigs, &mut analysis_rng(a.seed, 0))?;
    write_report(&report, &a.out)?;
    let result = StatsOutput::new(&stats, true, &config);
    if !result.meets_target {
        let _ = writeln!(err, "warning: sample does not meet the convergence point");
    }
    let _ = writeln!(err, "wrote report for {} runs to {}", sample.run_count(), a.out.display());
    emit(out, &ReportOutput { stats: result, out: &a.out })?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyOutput {
    delta_xy: f64,
    p_value: f64,
    alpha: f64,
    reproduced: bool,
    curator_mean: f64,
    curator_stdev: f64,
    curator_count: usize,
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let report = read_report(&a.report)?;
    let sample = match (&a.sample, &a.model) {
        (Some(path), None) => read_sample(path)?,
        (None, Some(id)) => {
            let (spec, _) = configure_model(id, &a.overrides, &a.scale_inputs)?;
            spec.simulate(report.sample_size, &report.simulation_times, a.seed)?
        }
        _ => return Err(Error::InvalidArgument("give exactly one of --sample or --model".into())),
    };
    let sample = sample.round_sigfigs(report.significant_figures)?;
    let config = ReproConfig {
        rel_tol: a.rel_tol,
        max_evals: a.max_evals,
        ..ReproConfig::default()
    };
    let v = verify_report(&report, &sample, a.alpha, &config, &mut analysis_rng(a.seed, 0))?;
    let _ = writeln!(
        err,
        "delta_xy {:.6}, p-value {:.4} at alpha {}: {}",
        v.delta_xy,
        v.p_value,
        v.alpha,
        if v.reproduced { "reproduced" } else { "not reproduced" }
    );
    emit(
        out,
        &VerifyOutput {
            delta_xy: v.delta_xy,
            p_value: v.p_value,
            alpha: v.alpha,
            reproduced: v.reproduced,
            curator_mean: v.curator_stats.mean,
            curator_stdev: v.curator_stats.stdev,
            curator_count: v.curator_stats.count,
        },
    )?;
    Ok(if v.reproduced { 0 } else { 1 })
}

#[derive(Serialize)]
struct VariableError<'a> {
    variable: &'a str,
    delta: f64,
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    delta: f64,
    per_variable: Vec<VariableError<'a>>,
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = EcfConfig::new(a.m, a.k)?;
    let x = read_sample(&a.a)?;
    let y = read_sample(&a.b)?;
    let c = compare_samples_detailed(&x, &y, config)?;
    let _ = writeln!(err, "EFECT error {:.6}", c.delta.value());
    let per_variable = x
        .variable_names()
        .iter()
        .zip(&c.per_variable)
        .map(|(v, &delta)| VariableError { variable: v, delta })
        .collect();
    emit(out, &CompareOutput { delta: c.delta.value(), per_variable })?;
    Ok(0)
}
