use std::path::PathBuf;

use drift_core::DriftError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// Config or argument validation; several problems may be joined.
    #[error("{0}")]
    Invalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] DriftError),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub(crate) fn io_error(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.into(),
        source,
    }
}
