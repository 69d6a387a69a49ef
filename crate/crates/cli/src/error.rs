use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown columns, malformed input content.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dtg_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 0 success, 1 usage/specification, 2 numerical failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use dtg_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                E::Io(_) => 3,
                E::RootNotConverged { .. }
                | E::QuadratureNotConverged { .. }
                | E::NoInteriorCriticalPoint { .. }
                | E::Inference(_) => 2,
                _ => 1,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(source) => CliError::Io {
                    context: "csv".into(),
                    source,
                },
                other => CliError::Usage(format!("{other:?}")),
            }
        } else {
            CliError::Usage(format!("malformed CSV: {e}"))
        }
    }
}
