use thiserror::Error;

/// Errors raised across the library and the command-line surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("moment of order {order} does not exist for tail index {tail_index}")]
    MomentNonexistent { order: f64, tail_index: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("singular regression: {0}")]
    Singular(String),

    #[error("specification error: {0}")]
    Specification(String),

    #[error("{path}: row {row}: {message}")]
    Data {
        path: String,
        row: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Specification(msg.into())
    }

    /// Process exit code: 1 usage, 2 data, 3 numeric/degenerate.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Specification(_) => 1,
            Error::Data { .. } | Error::Io(_) | Error::InsufficientData(_) => 2,
            Error::Domain(_)
            | Error::MomentNonexistent { .. }
            | Error::Degenerate(_)
            | Error::Singular(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
