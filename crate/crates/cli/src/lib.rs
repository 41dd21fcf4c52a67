//! Declarative experiment runner: one JSON config in, CSV artifacts and a
//! manifest out.

pub mod config;
pub mod run;

pub use config::{ComponentParams, Experiment, HiddenParams};
pub use run::{run_experiment, Manifest, OutputEntry, MANIFEST_FILE};

use extreme_chains::Error;

/// Failure category of a run, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Validation { .. } | Error::Unsupported(_) | Error::Regime(_) => CliError::Config(msg),
            Error::Io(_) => CliError::Io(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
