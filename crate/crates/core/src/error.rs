use thiserror::Error;

/// Errors raised by state construction and the information-theoretic routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    #[error("value outside domain: {0}")]
    DomainError(String),

    #[error("relative entropy is infinite: support of the first argument is not contained in the second")]
    InfiniteRelativeEntropy,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
