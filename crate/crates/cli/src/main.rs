use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use combband::bounds::mset_report;
use combband::environment::EnvKind;
use combband::harness::{
    run_experiment, summarize, write_summary, write_summary_csv, write_trace, write_trace_csv, RunSettings,
    SetChoice,
};
use combband::learner::AlgoKind;

#[derive(Parser)]
#[command(name = "combband", version, about = "Regret experiments for combinatorial semi-bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write pseudo-regret as CSV.
    Run(RunArgs),
    /// Print the closed-form regret constants for an m-set instance.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// stochastic, phased or bandit.
    #[arg(long)]
    env: Option<EnvKind>,
    /// hypercube, mset or enumerated:<file>.
    #[arg(long, value_parser = parse_set)]
    set: Option<SetChoice>,
    /// Comma-separated: hybrid, exp2, logbarrier, combucb, thompson, bandit-hybrid.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<AlgoKind>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    phase_base: Option<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    log_points: Option<usize>,
    /// Extra rounds to log, comma-separated.
    #[arg(long, value_delimiter = ',')]
    log_times: Option<Vec<u64>>,
    /// Trace CSV path; the trace goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-round mean and standard error (next to --out, or to
    /// stdout instead of the trace).
    #[arg(long)]
    summary: bool,
    #[arg(long)]
    gamma_override: Option<f64>,
    #[arg(long)]
    lr_scale: Option<f64>,
    /// Sweep learning-rate multipliers 2^-5 … 2^5.
    #[arg(long)]
    lr_grid: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    gap: f64,
    #[arg(long)]
    gamma: Option<f64>,
}

fn parse_set(s: &str) -> Result<SetChoice, String> {
    s.parse().map_err(|e: combband::Error| e.to_string())
}

impl RunArgs {
    fn settings(&self) -> Result<RunSettings> {
        let file = match &self.config {
            Some(path) => RunSettings::load(path)?,
            None => RunSettings::default(),
        };
        let flags = RunSettings {
            env: self.env,
            set: self.set.clone(),
            algos: self.algo.clone(),
            d: self.d,
            m: self.m,
            gap: self.gap,
            phase_base: self.phase_base,
            horizon: self.horizon,
            runs: self.runs,
            seed: self.seed,
            log_points: self.log_points,
            log_times: self.log_times.clone(),
            out: self.out.clone(),
            summary: self.summary.then_some(true),
            gamma_override: self.gamma_override,
            lr_scale: self.lr_scale,
            lr_grid: self.lr_grid.then_some(true),
        };
        Ok(file.merge(flags))
    }
}

/// `results.csv` → `results.summary.csv`.
fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn run(args: &RunArgs) -> Result<()> {
    let settings = args.settings()?;
    let config = settings.resolve()?;
    eprintln!(
        "running {} × {} run(s) on {} ({}), T = {}",
        config.algorithms.len(),
        config.runs,
        config.env.kind,
        config.set,
        config.env.horizon
    );
    let trace = run_experiment(&config)?;
    let want_summary = settings.summary.unwrap_or(false);
    match &settings.out {
        Some(out) => {
            write_trace_csv(&trace, out)?;
            eprintln!("wrote {}", out.display());
            if want_summary {
                let path = summary_path(out);
                write_summary_csv(&summarize(&trace)?, &path)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let stdout = std::io::stdout().lock();
            if want_summary {
                write_summary(&summarize(&trace)?, stdout)?;
            } else {
                write_trace(&trace, stdout)?;
            }
        }
    }
    Ok(())
}

fn bounds(args: &BoundsArgs) -> Result<()> {
    let report = mset_report(args.d, args.m, args.gap, args.gamma)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{report}").context("writing to stdout")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Bounds(args) => bounds(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
