use std::path::PathBuf;

use sqg_core::Error as CoreError;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const INVALID_CONFIG: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const BLOW_UP: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::INVALID_CONFIG,
            CliError::Io { .. } | CliError::Format { .. } => exit::IO,
            CliError::Core(e) => match e {
                CoreError::Config(_)
                | CoreError::InvalidGrid(_)
                | CoreError::OrderOutOfRange(_)
                | CoreError::InvalidArgument(_)
                | CoreError::SeriesTruncation { .. } => exit::INVALID_CONFIG,
                CoreError::NonContraction(_) => exit::NOT_CONVERGED,
                CoreError::Diverged(_) | CoreError::IterationBlowUp(_) | CoreError::NonFinite { .. } => exit::BLOW_UP,
                _ => exit::VERIFY_FAILED,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
