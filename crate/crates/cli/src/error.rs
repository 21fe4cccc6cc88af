use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: configuration, flags, dataset or table contents.
    #[error("{0}")]
    Validation(String),
    #[error("{path}:{line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },
    #[error("sampling failed: {0}")]
    Sampling(String),
    /// Some grid points failed; the table was still written.
    #[error("{failed} of {total} grid points failed (see {table})")]
    PartialSweep { failed: usize, total: usize, table: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(detail: impl Into<String>) -> Self {
        CliError::Validation(detail.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, detail: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            detail: detail.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Parse { .. } => 2,
            CliError::Sampling(_) => 3,
            CliError::PartialSweep { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
