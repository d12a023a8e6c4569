use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("solver error: {0}")]
    Solver(#[from] fbtumor_core::Error),

    #[error("{0}")]
    Output(String),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    /// `2` configuration, `3` numerical failure, `4` invariant violation.
    pub fn exit_code(&self) -> i32 {
        use fbtumor_core::Error as E;
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Solver(E::Invariant(_) | E::Consistency(_)) | Self::Verify(_) => 4,
            Self::Solver(_) | Self::Output(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
