use thiserror::Error;

/// Errors produced by the library.
///
/// Variants map one-to-one onto the CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    /// An exhaustive search would exceed its configured budget.
    #[error("capacity exceeded in {op}: {needed} exceeds limit {limit}")]
    Capacity {
        op: &'static str,
        needed: u128,
        limit: u128,
    },

    /// Input outside the mathematical domain of the operation (e.g. a non-SPD matrix).
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("numerical failure in {op} at iteration {iteration}: {reason}")]
    Numerical {
        op: &'static str,
        iteration: usize,
        reason: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}, line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(op: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Config(_)
            | Error::Parse { .. }
            | Error::Io(_) => 2,
            Error::Capacity { .. } => 3,
            Error::Domain { .. } | Error::Numerical { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
