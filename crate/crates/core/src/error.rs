use thiserror::Error;

use crate::lp::LpStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} candidates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("voter {voter} has no identifiable top choice")]
    NoTopChoice { voter: usize },

    #[error("profile is not realizable: {0}")]
    Realizability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program ended with status {0:?}")]
    Lp(LpStatus),

    #[error("did not converge after {iterations} iterations (best gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("projection stalled after {} iterations with gap {:e}", .0.iterations, .0.fw_gap)]
    ProjectionStalled(Box<crate::projection::ProjectionResult>),

    #[error("could not certify a stable lottery: max expected blocking {achieved} exceeds {bound}")]
    StabilityNotCertified { achieved: f64, bound: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Domain errors (bad data or unrealizable profiles) as opposed to I/O and
    /// parsing problems.
    pub fn is_domain(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
