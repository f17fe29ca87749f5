//! `qsearch` — deterministic Monte Carlo experiments over the
//! feedback-controlled search simulators.
//!
//! Exit codes: 0 on success, 2 on a usage error, 3 on an I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsearch_harness::config::{
    parse_engine, parse_format, parse_mode, ExperimentConfig, ExperimentKind, HarnessError,
    Overrides,
};
use qsearch_harness::experiments::run_experiment;

#[derive(Parser)]
#[command(
    name = "qsearch",
    about = "Exact simulation and claim auditing for a measurement-driven fixed-point search loop",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the analytic counter-ratio table with a Monte Carlo cross-check.
    Table1(CommonArgs),
    /// Run full searches and record one row per trial.
    Simulate(CommonArgs),
    /// Audit the first-attempt success claim over a grid of target fractions.
    Audit(CommonArgs),
    /// Median stopping-iteration scaling study with log-log fits.
    Scaling(CommonArgs),
    /// Head-to-head query costs against reference searchers.
    Baseline(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Plain-text key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed; every trial derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Flag-measurement dynamics: idealized|physical.
    #[arg(long)]
    mode: Option<String>,
    /// Simulation engine: full|compact.
    #[arg(long)]
    engine: Option<String>,
    /// Stopping threshold on the counter ratio C1/C0.
    #[arg(long = "set-val")]
    set_val: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv|json.
    #[arg(long)]
    format: Option<String>,
    /// Register size in qubits (N = 2^n).
    #[arg(long)]
    n: Option<u32>,
    /// Number of marked states.
    #[arg(long)]
    m: Option<u64>,
    /// Comma-separated target fractions.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Comma-separated instance sizes N for the scaling sweep.
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Option<Vec<u64>>,
    /// Worker thread count (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl CommonArgs {
    fn into_overrides(self) -> Result<Overrides, HarnessError> {
        let file = match &self.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            seed: self.seed,
            trials: self.trials,
            mode: self.mode.as_deref().map(parse_mode).transpose()?,
            engine: self.engine.as_deref().map(parse_engine).transpose()?,
            set_val: self.set_val,
            out: self.out,
            format: self.format.as_deref().map(parse_format).transpose()?,
            n: self.n,
            m: self.m,
            p_grid: self.p,
            n_list: self.n_list,
            workers: self.workers,
        };
        Ok(file.merged_with(flags))
    }
}

fn run() -> Result<(), HarnessError> {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Table1(a) => (ExperimentKind::Table1, a),
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Audit(a) => (ExperimentKind::Audit, a),
        Command::Scaling(a) => (ExperimentKind::Scaling, a),
        Command::Baseline(a) => (ExperimentKind::Baseline, a),
    };
    let cfg = ExperimentConfig::build(kind, args.into_overrides()?)?;
    if let Some(workers) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?;
    }
    run_experiment(&cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
