use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("negative scaling factor {0}")]
    NegativeScale(f64),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("function is not regular at {0:?}")]
    NotRegular(Vec<f64>),

    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("time {t} is beyond the recorded horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("ensemble too small: {found} < {required}")]
    EnsembleTooSmall { found: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
