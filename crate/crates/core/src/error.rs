use thiserror::Error;

/// Errors raised by density construction, fusion and the simulation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("covariance is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("fusion weight omega = {0} is outside the admissible range")]
    InvalidOmega(f64),

    #[error("empty mixture")]
    EmptyMixture,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow while counting assignments")]
    Overflow,

    #[error("set has {size} elements, exceeding the enumeration cap of {cap}")]
    SetTooLarge { size: usize, cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 1 for bad input or configuration, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Format(_)
            | Error::InvalidOmega(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. } => 1,
            Error::NotPositiveDefinite | Error::EmptyMixture | Error::Overflow | Error::SetTooLarge { .. } => 2,
        }
    }
}
