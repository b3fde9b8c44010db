use thiserror::Error;

/// Errors produced by the coding, modelling and search routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A concatenation that violates a balance or divisibility condition.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("missing distribution entry: {0}")]
    MissingEntry(String),

    /// The target frame error rate is not reached anywhere on the SNR grid.
    #[error("target out of range: {0}")]
    OutOfRange(String),

    #[error("unsolvable: {0}")]
    Unsolvable(String),

    #[error("database format: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } | Error::InvalidParameter(_) => "invalid-input",
            Error::Infeasible(_) => "infeasible",
            Error::MissingEntry(_) => "coverage",
            Error::OutOfRange(_) | Error::Unsolvable(_) => "out-of-range",
            Error::Format(_) | Error::Json(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
