//! Experiment runner over the core library: each named experiment computes
//! a per-n table, extrapolates its limit, compares against a reference
//! constant when one exists, and emits a reproducible JSON or CSV report.
//! The `cclab` binary is a thin argument-parsing wrapper.

use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, Format};
pub use experiments::{catalog, CatalogEntry};
pub use report::{Extrapolated, Reference, Report, TableRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment '{0}'; run with --list for the catalog")]
    UnknownExperiment(String),

    #[error("invalid config field '{field}': {message}")]
    InvalidConfig { field: &'static str, message: String },

    #[error(transparent)]
    Core(#[from] cclab_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Run the experiment described by `config`. Deterministic for a fixed
/// config: the only randomness is the fixed-seed sample clouds, and the
/// seed is recorded in the report.
pub fn run(config: &ExperimentConfig) -> CliResult<Report> {
    experiments::run(config)
}
