use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines and the CLI plumbing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge (last iterate {last})")]
    NoConvergence { what: String, last: Complex64 },

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("imaginary residual {residual:e} exceeds {bound:e}")]
    ImaginaryResidual { residual: f64, bound: f64 },

    #[error("wrong branch: {0}")]
    WrongBranch(String),

    #[error("trajectory jumped branches near tau = {tau}")]
    BranchJump { tau: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("no trajectory sample covers tau = {tau}")]
    InterpolationGap { tau: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}
