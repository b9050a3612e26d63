//! Batch front door for the sysrel toolkit: dataset ingestion,
//! end-to-end analyses, and plot-ready output tables.

pub mod analyses;
pub mod config;
pub mod dataset;
pub mod netfmt;
pub mod tables;

use thiserror::Error;

/// CLI-level error, categorized for exit codes: parse failures exit 2,
/// validation failures 3, runtime failures 4.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<sysrel::Error> for CliError {
    fn from(e: sysrel::Error) -> CliError {
        use sysrel::Error::*;
        match e {
            Data(_) | Schema(_) | Empty(_) => CliError::Parse(e.to_string()),
            Param(_) | Domain(_) => CliError::Validation(e.to_string()),
            Init(_) | NanLogPosterior { .. } | Numerical(_) => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
