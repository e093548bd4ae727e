use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed coefficient: {0}")]
    MalformedCoefficient(String),

    #[error("pole at {param} = 0 in {expr}")]
    Pole { param: String, expr: String },

    #[error("history too short: need {needed} time levels, have {available}")]
    History { needed: usize, available: usize },

    #[error("unbound parameter `{0}`")]
    Unbound(String),

    #[error("{component}: {message}")]
    Validation { component: String, message: String },

    #[error("matrix is not invertible")]
    NotInvertible,

    #[error("relaxation rate s{0} is zero, the relaxation matrix is singular")]
    SingularRelaxation(usize),

    #[error("time-derivative elimination failed: {0}")]
    Elimination(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
