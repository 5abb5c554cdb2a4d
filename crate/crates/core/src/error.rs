use thiserror::Error;

/// Errors raised by the arithmetic, summation and bound routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{a} is not invertible modulo {q}")]
    NotInvertible { a: i64, q: u64 },
    #[error("not coprime: {0}")]
    NotCoprime(String),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn not_coprime(msg: impl Into<String>) -> Self {
        Error::NotCoprime(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
