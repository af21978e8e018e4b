mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cs_radial::Execution;

use commands::Run;
use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "csradial", version, about = "Radial Chern-Simons-Schroedinger solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for one or more node counts at a fixed coupling.
    Solve(Common),
    /// Solve k = 0..n-1 and check that the solutions are distinct.
    Multiplicity(Common),
    /// Continue branches over a range of couplings.
    Sweep(Common),
    /// Reconstruct the gauge fields of a profile.
    Gauge(Common),
    /// Check the structural hypotheses on the nonlinearity.
    Hypotheses(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the solver seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long)]
    threads: Option<usize>,
}

type Action = fn(&Run) -> Result<(), CliError>;

fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(t) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, action): (&Common, Action) = match &cli.command {
        Command::Solve(c) => (c, commands::solve),
        Command::Multiplicity(c) => (c, commands::multiplicity),
        Command::Sweep(c) => (c, commands::sweep),
        Command::Gauge(c) => (c, commands::gauge),
        Command::Hypotheses(c) => (c, commands::hypotheses),
    };
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.solver.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))?;
    let base = common.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let exec = execution(common.threads)?;
    action(&Run::new(config, base, out, exec)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("csradial: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
