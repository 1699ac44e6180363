//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input: malformed config, out-of-range parameter, parse failure.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical precondition failed (CFL violation, boundary clash, singular point).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Index or dimension mismatch between cooperating objects.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Iterative method failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
