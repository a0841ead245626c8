use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure in {context} at node {node}{}", path.map(|p| format!(", path {p}")).unwrap_or_default())]
    NumericalFailure {
        context: String,
        node: usize,
        path: Option<usize>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("missing configuration key `{0}`")]
    MissingKey(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(context: impl Into<String>, node: usize, path: Option<usize>) -> Self {
        LabError::NumericalFailure {
            context: context.into(),
            node,
            path,
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
