use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("damping period {damping} does not tile the grid period {grid}")]
    PeriodMismatch { damping: f64, grid: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("singular or ill-conditioned system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero input: the requested ratio is undefined")]
    ZeroInput,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors raised by the numerical guards (conditioning,
    /// resolution, non-finite values) rather than by bad parameters.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::UnderResolved(_)
                | Error::Singular { .. }
                | Error::LinearAlgebra(_)
                | Error::NonFinite { .. }
        )
    }
}
