use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition {parts:?}: {reason}")]
    InvalidPartition { parts: Vec<usize>, reason: &'static str },

    #[error("invalid cycle type {cycles:?}: {reason}")]
    InvalidCycleType { cycles: Vec<usize>, reason: &'static str },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("hook product does not divide {n}! for partition {parts:?}")]
    HookDivision { n: usize, parts: Vec<usize> },

    #[error("partition {parts:?} does not fit in a {rows}x{cols} box")]
    DoesNotFit { parts: Vec<usize>, rows: usize, cols: usize },

    #[error("{what}: parameter out of range ({detail})")]
    OutOfRange { what: &'static str, detail: String },

    #[error("measure is not supported on the alternating group: {0}")]
    OddMeasureOnAlternating(String),

    #[error("distribution is not normalized: total mass {total}")]
    Unnormalized { total: f64 },

    #[error("resource guard: {what} requires n <= {limit}, got {n}")]
    ResourceGuard { what: &'static str, n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange { what, detail: detail.into() }
}
