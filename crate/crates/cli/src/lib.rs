//! Command-line front end: configuration, subcommand dispatch and report
//! emission.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use foliation_core::Error;

pub const EXIT_OK: u8 = 0;
/// Configuration, I/O or unexpected errors.
pub const EXIT_ERROR: u8 = 1;
/// A check ran and failed (classification, chart or verification).
pub const EXIT_CHECK_FAILED: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_ERROR,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownProblem(_)
        | Error::UnknownParameter { .. }
        | Error::NotEquilibrium { .. } => EXIT_ERROR,
        Error::AmbiguousClustering { .. }
        | Error::ImaginarySpectrum { .. }
        | Error::NotNormallyHyperbolic(_) => EXIT_CHECK_FAILED,
        Error::DomainViolation { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotInSubspace { .. }
        | Error::EmptyUnstable
        | Error::Precondition(_)
        | Error::InvalidArgument(_) => EXIT_PRECONDITION,
        Error::NewtonFailed { .. }
        | Error::Singular(_)
        | Error::TailBound { .. }
        | Error::NonConvergence { .. }
        | Error::LeftBall { .. }
        | Error::EmptyWindow => EXIT_SOLVER,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "foliate",
    version,
    about = "Fibers of stable and unstable foliations near manifolds of equilibria"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Registered problem name (overrides `problem`)
    #[arg(long, global = true, value_name = "NAME")]
    pub problem: Option<String>,
    /// Fiber kind: stable or unstable
    #[arg(long, global = true, value_name = "KIND")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct PointArgs {
    /// Boundary coordinates in the stable (unstable) basis, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub boundary: Option<Vec<f64>>,
    /// Base-point coordinates in the center basis, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral split and normal-hyperbolicity classification
    Analyze,
    /// Equilibrium chart: graph samples and its verification
    Chart,
    /// One fiber point with its trajectory and flow verification
    Fiber(PointArgs),
    /// Fibers over a rectangular grid of boundary and base-point coordinates
    Foliate,
    /// Stable-fiber coordinates of an initial value
    Decompose {
        /// Initial value, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        u0: Option<Vec<f64>>,
    },
    /// Flow verification for a batch of fibers
    Verify,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
