use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (dimension mismatch, out-of-range parameter, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The exact enumeration oracle was asked for more points than it can enumerate.
    #[error("enumeration budget exceeded: n = {n} > {cap}; use the Monte Carlo estimator")]
    BudgetExceeded { n: usize, cap: usize },

    /// A computation produced a non-finite value (e.g. training divergence).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
