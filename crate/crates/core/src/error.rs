use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis mismatch: operation requires the {expected} basis")]
    BasisMismatch { expected: &'static str },

    #[error("non-finite value encountered ({0})")]
    NonFinite(&'static str),

    #[error("dense enumeration over {vars} variables exceeds the cap of {cap}; supply a Monte Carlo sample budget")]
    DenseCapExceeded { vars: usize, cap: usize },

    #[error("search budget exceeded in {what}: needs {needed}, budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("local fit skipped: {0}")]
    LocalFitFailed(String),

    #[error("degree {degree} exceeds the allowed maximum {max}")]
    DegreeViolation { degree: usize, max: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by a configured cap or budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::DenseCapExceeded { .. } | Error::BudgetExceeded { .. } | Error::LocalFitFailed(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
