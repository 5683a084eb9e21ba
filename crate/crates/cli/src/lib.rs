//! Command-line front end: solvability check, domain construction, exit
//! sampling, path simulation and the consolidated report.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success; for `check`, an embedding is established |
//! | 1  | I/O or other runtime failure |
//! | 2  | `check`: solvability not established |
//! | 3  | boundary function not integrable |
//! | 4  | boundary curve not simple |
//! | 5  | step budget exhausted; partial samples kept |
//! | 6  | `report`: fragments missing |
//! | 7  | `report`: assembled, but a check failed |
//! | 64 | bad usage, config, table or spec |

pub mod commands;
pub mod config;
pub mod report;
pub mod source;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigArgs, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_ESTABLISHED: i32 = 2;
pub const EXIT_NON_INTEGRABLE: i32 = 3;
pub const EXIT_NON_SIMPLE: i32 = 4;
pub const EXIT_STEP_BUDGET: i32 = 5;
pub const EXIT_MISSING_FRAGMENTS: i32 = 6;
pub const EXIT_CHECKS_FAILED: i32 = 7;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }
}

impl From<skorokhod_core::Error> for CliError {
    fn from(e: skorokhod_core::Error) -> Self {
        use skorokhod_core::Error as E;
        let code = match &e {
            E::Validation { .. } | E::Parse(_) | E::InvalidArgument(_) => EXIT_USAGE,
            E::NonIntegrable { .. } => EXIT_NON_INTEGRABLE,
            E::NonSimple { .. } | E::DegenerateSegment(_) => EXIT_NON_SIMPLE,
            E::StepBudget { .. } => EXIT_STEP_BUDGET,
            _ => EXIT_FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "skorokhod", version, about = "Planar Skorokhod embedding domains: build, check and simulate")]
pub struct Cli {
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the integrability tests and classify the target law.
    Check,
    /// Compute the series, the boundary polyline and its SVG.
    Build,
    /// Draw exact exit positions and compare them with the target law.
    Sample,
    /// Simulate Brownian paths (Euler and walk-on-spheres) to the boundary.
    Simulate,
    /// Merge the fragments in the output directory into report.json.
    Report,
    /// Write domain.svg only.
    Plot,
    /// Print the resolved configuration in file form.
    Config {
        /// Write it here instead of stdout.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }
    let result = cli.config.resolve().and_then(|cfg| commands::dispatch(&cli.command, &cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
