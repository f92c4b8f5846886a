use thiserror::Error;

/// Errors produced anywhere in the evaluation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record (field `{field}`): {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("backend `{backend}` failed: {message}")]
    Backend { backend: String, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("extraction produced no content units for `{0}`")]
    EmptyExtraction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn backend(backend: impl Into<String>, message: impl ToString) -> Self {
        Error::Backend {
            backend: backend.into(),
            message: message.to_string(),
        }
    }

    /// Broad failure class, used to pick process exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Backend { .. } => ErrorClass::Backend,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Backend,
    Io,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
