use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no minimum found on [{lo}, {hi}] Å (potential is monotone on the bracket)")]
    NoMinimum { lo: f64, hi: f64 },

    #[error("quadrature did not converge at R = {r} Å (estimated error {error:e})")]
    Quadrature { r: f64, error: f64 },

    #[error("grid too coarse: eigenvalue shifts by {shift:e} (relative) under 2x refinement")]
    GridTooCoarse { shift: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
