//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design space: {0}")]
    InvalidSpace(String),

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error("invalid fraction: {0}")]
    InvalidFraction(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid GWLP vector: {0}")]
    InvalidGwlp(String),

    #[error("GWLP length mismatch: {left} vs {right} entries")]
    GwlpLengthMismatch { left: usize, right: usize },

    #[error("design spaces do not match")]
    SpaceMismatch,

    #[error("invalid removal subset: {0}")]
    InvalidSubset(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{what} = {actual} exceeds the supported limit {limit}")]
    Capacity {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
