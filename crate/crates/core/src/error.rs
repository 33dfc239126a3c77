//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by regression, bound evaluation, and experiment code.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed call arguments (dimension mismatches, wrong shapes, bad levels).
    #[error("input error: {0}")]
    Input(String),

    /// Invalid or inconsistent configuration (bad parameters, unreachable targets).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure (factorization loss, bracket expansion failure).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
