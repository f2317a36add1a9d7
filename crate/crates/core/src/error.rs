use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("atom {index} has non-positive mass {mass}")]
    NonPositiveMass { index: usize, mass: f64 },

    #[error("diffuse interval ({a}, {b}) is empty or reversed")]
    EmptyInterval { a: f64, b: f64 },

    #[error("diffuse level {0} exceeds the supported maximum of {max}", max = crate::measure::MAX_LEVEL)]
    LevelTooLarge(u32),

    #[error("space has no diffuse part to refine")]
    PurelyAtomic,

    #[error("operation requires a purely atomic space")]
    DiffusePresent,

    #[error("exponent p = {0} is not a finite real >= 1")]
    InvalidExponent(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operands live on different measure spaces")]
    SpaceMismatch,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("blocks do not cover index {0}")]
    UncoveredIndex(usize),

    #[error("epsilon {eps} must lie strictly between 0 and max|u| = {sup}")]
    InvalidEpsilon { eps: f64, sup: f64 },

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
