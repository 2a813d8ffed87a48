//! Command-line front end over the displacement library.
//!
//! The binary exposes five subcommands: `compute` (one series by any
//! route), `figure` (the eight built-in reference data files), `sweep`
//! (regime classification along a cyclotron-rate ladder), `simulate`
//! (the stochastic ensemble with explicit step controls), and `selftest`
//! (the consistency suite). Exit codes are part of the interface:
//!
//! | code | meaning                          |
//! |------|----------------------------------|
//! | 0    | success                          |
//! | 1    | selftest failure                 |
//! | 2    | configuration or usage error     |
//! | 3    | quadrature failed to converge    |
//! | 4    | non-monotone classification flip |
//!
//! `QBM_THREADS` optionally caps the thread pool; everything else is
//! controlled by flags or a JSON config file (flags win).

pub mod cli;
pub mod config;
pub mod output;
pub mod runner;

use std::path::PathBuf;

use cli::{Cli, Command};
use config::{CommandProfile, FileConfig};
use qbm::{QbmError, Result};
use runner::LadderSpec;

/// Process exit code of a library error.
fn exit_code(error: &QbmError) -> i32 {
    match error {
        QbmError::Convergence { .. } => 3,
        QbmError::NonMonotoneFlip { .. } => 4,
        _ => 2,
    }
}

fn load_optional(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        Some(p) => config::load_file(p),
        None => Ok(FileConfig::default()),
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Compute(args) => {
            let file = load_optional(&args.config)?;
            let run = config::resolve(&file, &args.flags, CommandProfile::Compute)?;
            runner::run_compute(&run)?;
            Ok(0)
        }
        Command::Figure(args) => {
            runner::run_figure(args.id, &args.output, args.format)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let file = load_optional(&args.config)?;
            let run = config::resolve(&file, &args.flags, CommandProfile::Sweep)?;
            let ladder = LadderSpec {
                start: args.wc_start,
                end: args.wc_end.unwrap_or(args.wc_start),
                points: args.wc_points,
                spacing: args.wc_spacing,
            };
            runner::run_sweep(&run, &ladder)?;
            Ok(0)
        }
        Command::Simulate(args) => {
            let file = load_optional(&args.config)?;
            let run = config::resolve(&file, &args.flags, CommandProfile::Simulate)?;
            runner::run_simulate(&run)?;
            Ok(0)
        }
        Command::Selftest => {
            let stdout = std::io::stdout();
            let passed = runner::run_selftest(&mut stdout.lock())
                .map_err(|e| QbmError::Config(format!("writing the report: {e}")))?;
            Ok(if passed { 0 } else { 1 })
        }
    }
}

/// Applies the optional `QBM_THREADS` cap to the global thread pool.
/// Must run before any parallel work; later calls cannot resize the pool.
fn init_thread_cap() -> Result<()> {
    let value = match std::env::var("QBM_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(QbmError::Config(format!("QBM_THREADS: {e}"))),
        Ok(v) => v,
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        QbmError::Config(format!(
            "QBM_THREADS = `{value}`, must be a positive integer"
        ))
    })?;
    if threads == 0 {
        return Err(QbmError::Config(
            "QBM_THREADS = 0, must be a positive integer".to_string(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| QbmError::Config(format!("QBM_THREADS: {e}")))
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Err(error) = init_thread_cap() {
        eprintln!("error: {error}");
        return 2;
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code(&error)
        }
    }
}
