//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by plan construction, operators, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent window split, e.g. `L + K - 1 != N`.
    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    /// Tensor, matrix or vector dimensions do not match the plan.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Requested rank is zero or exceeds `min(L, K)`.
    #[error("rank out of range: {0}")]
    Rank(String),

    /// SVD non-convergence or non-finite values in an iterate.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Zero signal where a nonzero norm is required.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Out-of-range scalar argument (fraction, alpha, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Flag combination the solver does not define, e.g. gradient + mask.
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    /// Malformed suite configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed binary tensor file; `offset` is the failing byte position.
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: u64, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-parseable code, used as a prefix on CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidPlan(_) => "E_PLAN",
            Error::Shape(_) => "E_SHAPE",
            Error::Rank(_) => "E_RANK",
            Error::Numerical(_) => "E_NUMERIC",
            Error::DegenerateSignal(_) => "E_DEGENERATE",
            Error::InvalidArgument(_) => "E_ARG",
            Error::UnsupportedCombination(_) => "E_UNSUPPORTED",
            Error::Config(_) => "E_CONFIG",
            Error::Parse { .. } => "E_PARSE",
            Error::Io(_) => "E_IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
