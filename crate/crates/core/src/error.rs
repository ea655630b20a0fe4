use thiserror::Error;

/// Errors raised by the matrix kernel, samplers, invariants and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("shape mismatch: expected dimension {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("degenerate Ginibre sample (zero trace) at index {0}")]
    DegenerateSample(u64),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("histogram axes do not match")]
    AxisMismatch,

    #[error("empty cell: ratio requested with zero total")]
    EmptyCell,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
