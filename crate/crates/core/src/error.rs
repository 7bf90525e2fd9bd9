use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("slot index {index} out of range for an order-{order} form")]
    SlotOutOfRange { index: usize, order: usize },

    /// The problem is too large for the requested exhaustive method.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("ratio is undefined for the zero form")]
    ZeroForm,

    #[error("root finding did not converge: {0}")]
    Convergence(String),

    #[error("all {0} ascent restarts ended at a degenerate stationary point")]
    AllRestartsDegenerate(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
