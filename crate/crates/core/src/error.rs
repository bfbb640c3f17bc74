use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("jump schedule must contain at least one jump")]
    EmptySchedule,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("non-finite value encountered at iteration {iteration}")]
    NumericalFailure { iteration: usize },

    #[error("objective has no stochastic gradient oracle")]
    NoStochasticGradient,
}

pub type Result<T> = std::result::Result<T, CoreError>;
