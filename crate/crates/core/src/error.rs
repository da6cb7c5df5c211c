use alloc::string::String;

/// Errors raised by the embedding core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("negative variance {value} at coordinate {index}")]
    NegativeVariance { index: usize, value: f64 },

    #[error("matrix is not symmetric (|a_ij - a_ji| = {0})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0})")]
    NotPsd(f64),

    #[error("gradient undefined at zero variance (coordinate {0})")]
    ZeroVariance(usize),

    #[error("triplet indices must be distinct: ({i}, {j}, {k})")]
    DuplicateIndex { i: usize, j: usize, k: usize },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("nodes {0} and {1} are not connected")]
    Unreachable(usize, usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate point set (all points coincide)")]
    Degenerate,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
