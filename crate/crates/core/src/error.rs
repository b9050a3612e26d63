use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Invalid distribution or model parameters.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent data records.
    #[error("data error: {0}")]
    Data(String),

    /// Data shape does not match the declared model structure.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// MCMC initialization failure (non-finite starting log-posterior).
    #[error("initialization error: {0}")]
    Init(String),

    /// Log-posterior returned NaN during sampling.
    #[error("log-posterior returned NaN after moving parameter '{param}'")]
    NanLogPosterior { param: String },

    /// Numerical procedure failed to converge or evaluate.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    Empty(String),
}
