//! Benchmark harness: experiment specs, the parallel runner and table output.

pub mod config;
pub mod experiment;
pub mod methods;
pub mod table;

pub use experiment::{run_experiment, ExperimentId, ExperimentSpec, Report, ResultRow, RunStatus};
pub use methods::{Family, Method, Variant};
pub use table::{emit, Format};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 3,
            CliError::Run(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}
