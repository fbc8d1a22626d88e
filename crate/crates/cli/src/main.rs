//! `rdl`: evaluate, search, and simulate rate-distortion-leakage regions.
//!
//! Exit codes: 0 success or member, 1 non-member or infeasible, 2 usage or
//! validation error. Machine-readable output goes to stdout (or `--out`);
//! diagnostics go to stderr.

mod commands;
mod inputs;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rdl_core::exec::Execution;

#[derive(Parser)]
#[command(name = "rdl", version, about = "Rate-distortion-leakage region toolkit")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Run every search and simulation on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and report its Markov structure.
    Validate {
        model: PathBuf,
    },
    /// Corner evaluation and membership queries.
    #[command(subcommand)]
    Region(RegionCommand),
    /// Minimum distortion versus leakage curves of the Gaussian one-sided setting.
    Fig4(Fig4Args),
    /// Pareto frontier over a grid of auxiliary channels.
    Frontier(FrontierArgs),
    /// Monte Carlo run of a coding scheme.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum RegionCommand {
    /// Corner point of a setting for given auxiliary channels.
    Eval(EvalArgs),
    /// Is a rate-distortion-leakage tuple achievable?
    Member(MemberArgs),
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    setting: String,
    /// JSON file with optional `u`, `v`, `xhat` channels and a table `g`.
    #[arg(long)]
    channels: Option<PathBuf>,
    /// `logloss`, `hamming`, or a JSON file `{"rows": [[...]]}`.
    #[arg(long, default_value = "logloss")]
    distortion: String,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    r3: Option<f64>,
    /// Helper quality for the Gaussian one-sided corner.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GridArgs {
    /// Grid resolution: channel entries are multiples of 1/k.
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Largest first auxiliary alphabet.
    #[arg(long, default_value_t = 4)]
    max_aux: usize,
    /// Largest second auxiliary alphabet.
    #[arg(long, default_value_t = 1)]
    max_second: usize,
    /// Enumerate every reconstruction table instead of the per-cell argmin.
    #[arg(long)]
    scan_g: bool,
}

#[derive(Args)]
pub struct MemberArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    setting: String,
    #[arg(long)]
    r1: f64,
    #[arg(long)]
    r2: f64,
    #[arg(long)]
    r3: Option<f64>,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value = "logloss")]
    distortion: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Fig4Args {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated R1 values.
    #[arg(long, value_delimiter = ',', required = true)]
    r1: Vec<f64>,
    /// Comma-separated R2 values.
    #[arg(long, value_delimiter = ',', required = true)]
    r2: Vec<f64>,
    /// Lower end of the leakage range; defaults to I(X;Z).
    #[arg(long)]
    delta_min: Option<f64>,
    /// Upper end of the leakage range; defaults to I(X;Y,Z).
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FrontierArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    setting: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "logloss")]
    distortion: String,
    /// Target distortion (logarithmic loss and closed-form settings).
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    r3: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scheme configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Seed for every random choice.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid flag combination detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(e: &anyhow::Error) -> u8 {
    let infeasible = e
        .chain()
        .any(|c| matches!(c.downcast_ref::<rdl_core::Error>(), Some(rdl_core::Error::Infeasible(_))));
    if infeasible {
        1
    } else {
        2
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let (outcome, out) = match &cli.command {
        Command::Validate { model } => (commands::validate(model)?, None),
        Command::Region(RegionCommand::Eval(a)) => (commands::region_eval(a)?, a.out.as_ref()),
        Command::Region(RegionCommand::Member(a)) => (commands::region_member(a, exec)?, a.out.as_ref()),
        Command::Fig4(a) => (commands::fig4(a)?, a.out.as_ref()),
        Command::Frontier(a) => (commands::frontier(a, exec)?, a.out.as_ref()),
        Command::Simulate(a) => (commands::simulate(a, exec)?, a.out.as_ref()),
    };
    match out {
        Some(path) => std::fs::write(path, &outcome.output)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&outcome.output)?;
            stdout.flush()?;
        }
    }
    Ok(outcome.code)
}

#[cfg(feature = "parallel")]
fn run_with_jobs(cli: &Cli) -> Result<u8> {
    match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| run(cli)),
        None => run(cli),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_jobs(cli: &Cli) -> Result<u8> {
    if cli.jobs.is_some() {
        log::info!("built without parallel support; --jobs has no effect");
    }
    run(cli)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run_with_jobs(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
