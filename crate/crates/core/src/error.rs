use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The transverse ray runs parallel to the boundary and never hits it.
    #[error("parallel escape: ray never reaches the boundary")]
    ParallelEscape,

    /// Zero transverse velocity: the particle moves along the axis forever.
    #[error("longitudinal-only motion, no next collision")]
    LongitudinalOnly,

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("period-2 fixed-point check failed (residual {residual:e})")]
    FixedPoint { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
