use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate domain: side {axis} has zero length")]
    DegenerateDomain { axis: usize },

    #[error("{value} is not an interior breakpoint of axis {axis}")]
    InvalidBreakpoint { axis: usize, value: f64 },

    #[error("invalid partition on axis {axis}: {reason}")]
    InvalidPartition { axis: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {value} on axis {axis} is outside [{lower}, {upper}]")]
    OutOfRange {
        axis: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid axis set: {0}")]
    InvalidAxisSet(String),

    #[error("invalid exponent {value} at position {index}: {reason}")]
    InvalidExponent {
        index: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("no non-degenerate pairs were sampled")]
    EmptySample,

    #[error("point {point:?} is not a node of the sampled field")]
    NodeMismatch { point: Vec<f64> },

    #[error("covariance factorization failed on axis {axis}: {reason}")]
    CovarianceError { axis: usize, reason: String },

    #[error("invalid sheet parameters: {0}")]
    InvalidSheet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Picard iteration did not contract on tile at {origin:?} after {iterations} iterations (last change {last_change:e})")]
    ContractionFailure {
        origin: Vec<f64>,
        iterations: usize,
        last_change: f64,
    },

    #[error("no contraction down to tile size {tile_size:?}")]
    NoContraction { tile_size: Vec<f64> },

    #[error("grids of the compared problems differ")]
    GridMismatch,

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
