//! Argument grammar of the `qbm` binary.
//!
//! Each subcommand takes an optional JSON config file plus flag
//! overrides; [`crate::config::resolve`] merges them. Clap handles usage
//! errors itself and exits with the config-error code.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigFlags, FormatName, SpacingName};

/// Mean-square displacement of a damped charged particle in a magnetic
/// field: closed form, quadrature, asymptotes, and a stochastic check.
#[derive(Debug, Parser)]
#[command(name = "qbm", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one displacement series by the chosen route and write it
    /// to a file.
    Compute(RunArgs),
    /// Write the data file of one of the eight built-in reference
    /// figures.
    Figure(FigureArgs),
    /// Classify a ladder of cyclotron rates and report where monotonic
    /// growth gives way to damped oscillation.
    Sweep(SweepArgs),
    /// Advance the stochastic ensemble with explicit step controls and
    /// write its mean-square displacement.
    Simulate(RunArgs),
    /// Run the built-in consistency suite and report per group.
    Selftest,
}

/// Shared shape of `compute` and `simulate`: a config file plus
/// overrides.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure number, 1 through 8.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub id: u8,

    /// Output file path.
    #[arg(long)]
    pub output: PathBuf,

    /// Output file format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatName,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub flags: ConfigFlags,

    /// First cyclotron rate of the ladder.
    #[arg(long)]
    pub wc_start: f64,

    /// Last cyclotron rate of the ladder; defaults to wc_start for a
    /// one-point ladder.
    #[arg(long)]
    pub wc_end: Option<f64>,

    /// Number of ladder points.
    #[arg(long, default_value_t = 16)]
    pub wc_points: usize,

    /// Ladder spacing rule.
    #[arg(long, value_enum, default_value = "log")]
    pub wc_spacing: SpacingName,
}
