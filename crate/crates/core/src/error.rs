use thiserror::Error;

/// Errors produced by the optimization toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("query budget exhausted: requested {requested}, remaining {remaining}")]
    BudgetExhausted { requested: u64, remaining: u64 },

    #[error("budget too small: {0}")]
    TooSmallBudget(String),

    #[error("objective not in the function class: {0}")]
    NotInClass(String),

    #[error("derivative does not change sign on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is not positive definite (min eigenvalue {0})")]
    NotPositiveDefinite(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
