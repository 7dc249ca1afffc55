use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input lies on (or within the guard buffer of) a set excluded from the model's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The cost is not differentiable at the requested point.
    #[error("cost is not differentiable: {0}")]
    NonDifferentiable(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a rotation matrix: {0}")]
    NotRotation(String),

    #[error("flow did not converge in {iterations} iterations (control norm {control_norm:e})")]
    MaxIters { iterations: usize, control_norm: f64 },

    #[error("flow stalled after {iterations} iterations (control norm {control_norm:e})")]
    Stalled { iterations: usize, control_norm: f64 },

    #[error("flow iterate entered an excluded region after {iterations} iterations: {reason}")]
    DomainBreach { iterations: usize, reason: String },

    #[error("mean is not unique: top eigenvalues {0} and {1} coincide")]
    AmbiguousMean(f64, f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
