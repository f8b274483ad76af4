//! Command-line front end for `fractalis-core`: configuration files, CSV
//! surfaces, verification reports and the `fractalis` binary's commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fractalis", version, about = "Multivariate fractal interpolation surfaces and operator checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample f^α (or a δ-FIF) on a grid and write CSV.
    Surface(CommonArgs),
    /// Evaluate at the given points, e.g. `0.1,0.2`.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Run the operator inequality checks.
    Verify(CommonArgs),
    /// Find a fractal polynomial within ε of f.
    Approx(CommonArgs),
    /// L^p norms and the L^p perturbation bound.
    Norms(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Points per axis, one value or one per axis.
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Configure the global thread pool from `FRACTALIS_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("FRACTALIS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("FRACTALIS_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

/// Run one command, writing reports to `out`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Surface(args) => commands::surface(args, out),
        Command::Eval { common, points } => commands::eval(common, points, out),
        Command::Verify(args) => commands::verify(args, out),
        Command::Approx(args) => commands::approx(args, out),
        Command::Norms(args) => commands::norms(args, out),
    }
}
