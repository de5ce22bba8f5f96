//! Command-line front end: fit a model to a data file, run replicated
//! simulation studies, and emit threshold or contour data.
//!
//! ```text
//! hiersparse fit|simulate|curves --config <path> [--data <path>] --out <path>
//!            [--seed N] [--reps N] [--threads N]
//! ```
//!
//! Exit status is 0 on success, 1 for invalid input, and 2 when a fit stops
//! at an iteration cap (its outputs are still written).

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hiersparse", version, about = "Sparse MAP estimation under hierarchical priors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output table; sibling files get suffixes appended to this path.
    #[arg(long)]
    pub out: PathBuf,
    /// Replaces the seed given in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (RAYON_NUM_THREADS is honored too). Results do not
    /// depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model to a data file.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Delimited data with a header row; response first for regressions.
        #[arg(long)]
        data: PathBuf,
    },
    /// Run replicated experiments (a preset or explicit configurations).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Replaces the replication count of every experiment.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Emit threshold-curve or penalty-contour data.
    Curves {
        #[command(flatten)]
        common: Common,
    },
}

fn set_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(error::input("--threads must be at least 1"));
        }
        // a pool already built in this process (e.g. by an earlier call) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Fit { common, data } => {
            set_threads(common.threads)?;
            commands::cmd_fit(&commands::FitArgs { config: &common.config, data, out: &common.out, seed: common.seed })
        }
        Command::Simulate { common, reps } => {
            set_threads(common.threads)?;
            let args = commands::SimulateArgs { config: &common.config, out: &common.out, seed: common.seed, reps: *reps };
            commands::cmd_simulate(&args).map(|_| ())
        }
        Command::Curves { common } => {
            set_threads(common.threads)?;
            commands::cmd_curves(&commands::CurvesArgs { config: &common.config, out: &common.out, seed: common.seed })
        }
    }
}

/// Parses arguments, runs the command, reports to stderr, and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("{e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            1
        }
    }
}
