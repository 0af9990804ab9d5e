use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("inverse square root iteration did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("spectrum outside (0, 3): eigenvalues in [{min}, {max}]")]
    SpectrumOutOfRange { min: f64, max: f64 },

    #[error("matrix is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularMatrix { min_eigenvalue: f64 },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error(
        "operator {index} is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})"
    )]
    NotPositive { index: usize, min_eigenvalue: f64 },

    #[error("POVM members do not sum to the identity (max deviation {deviation:e})")]
    Incomplete { deviation: f64 },

    #[error("ensemble trace is {trace}, expected 1")]
    TraceNotUnity { trace: f64 },

    #[error("ensemble needs at least two states, got {0}")]
    TooFewStates(usize),

    #[error("POVM needs at least one member")]
    EmptyPovm,

    #[error("negative joint probability p[{j}][{k}] = {value:e}")]
    NegativeProbability { j: usize, k: usize, value: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("iteration step failed: {0}")]
    StepFailed(String),

    #[error("no accepted round before the step size fell below {alpha:e}")]
    NoProgress { alpha: f64 },

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
