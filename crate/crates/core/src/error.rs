use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} {requested} exceeds the dense limit of {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("outside the validity domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(
        "integration lost accuracy (trace drift {drift:e} with dt = {dt:e}); use a smaller step"
    )]
    Accuracy { drift: f64, dt: f64 },

    #[error("rank-deficient fit: {0}")]
    Sampling(String),

    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
