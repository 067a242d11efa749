use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch { context: &'static str, expected: usize, actual: usize },

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("ellipticity violated: diffusion sample {value} below floor {floor} at half-point {index}")]
    EllipticityViolation { index: usize, value: f64, floor: f64 },

    #[error("numerical blow-up in {stage} at level {level}")]
    NumericalBlowup { stage: &'static str, level: usize },

    #[error(
        "conjugate gradient did not converge after {iterations} iterations (relative residual {relative_residual:e})"
    )]
    ConvergenceFailure { iterations: usize, relative_residual: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    EigensolverFailure { sweeps: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("time level {level} outside the open interval (0, {depth})")]
    OutOfDomain { level: usize, depth: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
