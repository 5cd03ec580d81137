use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuizError {
    /// Dense representation would exceed the configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("index out of range: {0}")]
    Index(String),

    /// Input failed a precondition check.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A Bloch vector is too short for its direction to be meaningful.
    #[error("undefined direction: {0}")]
    UndefinedDirection(String),

    /// Every rotation angle is stationary; there is no unique optimum.
    #[error("indeterminate optimum: sum of sines and sum of cosines both vanish")]
    IndeterminateOptimum,

    #[error("query budget exhausted after {used} queries")]
    BudgetExhausted { used: usize },

    /// Malformed serialized input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, QuizError>;

pub(crate) fn validation(msg: impl Into<String>) -> QuizError {
    QuizError::Validation(msg.into())
}
