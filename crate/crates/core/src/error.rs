use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("elements must have at least one atom")]
    ZeroDimension,

    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("atom {atom} out of range for dimension {dim}")]
    AtomOutOfRange { atom: usize, dim: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid order interval: lo is not below hi at atom {atom}")]
    InvalidInterval { atom: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partitions are over different intervals")]
    IntervalMismatch,

    #[error("point lies outside the interval at atom {atom}")]
    OutOfInterval { atom: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("operation requires a coordinatewise function")]
    NotCoordinatewise,

    #[error("general map has no computable extrema (needs dim <= 3 and corner-extremal cells)")]
    NoExtrema,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("kernel evaluation failed at atom {atom}: {source}")]
    Eval { atom: usize, source: EvalError },

    #[error("map evaluation failed: {0}")]
    MapEval(String),

    #[error("expression is not differentiable: {0}")]
    NotDifferentiable(String),

    #[error("point at atom {atom} is not interior to the interval")]
    Boundary { atom: usize },

    #[error("no sign change found for the mean value equation at atom {atom}")]
    BracketFailure { atom: usize },

    #[error("sum overflowed at atom {atom}")]
    Overflow { atom: usize },
}
