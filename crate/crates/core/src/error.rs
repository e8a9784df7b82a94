use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid grid, step size, or problem parameters.
    #[error("configuration error: {0}")]
    Config(&'static str),
    /// An operation was called with incompatible arguments (space tags, grids, dimensions).
    #[error("usage error: {0}")]
    Usage(&'static str),
    /// A numeric argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// The trajectory produced non-finite values or exceeded the blow-up guard.
    #[error("numerical instability at step {step}: {reason}")]
    Instability { step: usize, reason: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
