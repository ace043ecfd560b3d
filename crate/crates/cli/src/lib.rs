//! File formats and command implementations behind the `lexmdp` binary.

pub mod commands;
pub mod config;
pub mod document;
pub mod output;
pub mod strategy_file;
pub mod verify;

use lexmdp_core::{ModelError, SolveError};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    /// `verify` found a disagreement.
    pub const VERIFY_FAILED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(SolveError),
    #[error("{0}")]
    VerifyFailed(String),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => CliError::Model(m),
            SolveError::InvalidTolerances(msg) => CliError::Usage(msg),
            other => CliError::Solve(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Validation(_) | CliError::Model(_) => {
                exit::VALIDATION
            }
            CliError::Solve(_) => exit::PRECONDITION,
            CliError::VerifyFailed(_) => exit::VERIFY_FAILED,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}
