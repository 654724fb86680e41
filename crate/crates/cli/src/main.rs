//! `symspin`: config-driven runner for entropy curves, scaling fits and
//! cross-check suites.
//!
//! Exit codes: 0 success, 1 failed verification, 2 bad config or input,
//! 3 exhausted budget, 4 numerical failure. `SYMSPIN_THREADS` caps the
//! worker pool.

mod config;
mod entropy;
mod error;
mod fit;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "symspin",
    version,
    about = "Entanglement entropies of permutation-symmetric spin states"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute S_n(m) curves described by a TOML config.
    Entropy {
        #[arg(long)]
        config: PathBuf,
        /// Override `engine.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Override `output.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit S against log m for a curve CSV and print the fit as JSON.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<u64>>,
    },
    /// Run a cross-check suite: detA, oracles, recursion, reconstruction, geometry.
    Verify { suite: String },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SYMSPIN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::config(format!("SYMSPIN_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Entropy { config, seed, out } => entropy::run(&entropy::EntropyArgs { config, seed, out }),
        Command::Fit { csv, window } => fit::run(&csv, window.map(|w| (w[0], w[1]))),
        Command::Verify { suite } => verify::run(&suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("symspin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
