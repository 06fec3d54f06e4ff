use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed channel document {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cpmean_core::Error),
}

impl CliError {
    /// 2 for anything the caller can fix by changing the input, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(cpmean_core::Error::NonConvergence(_) | cpmean_core::Error::Numerical(_)) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
