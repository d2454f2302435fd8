use std::path::PathBuf;

use crate::config::ConfigError;
use crate::wav::WavError;

/// Process exit codes. Usage errors are reported by clap with code 2.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const INTERNAL: i32 = 5;
    pub const FORMAT: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Wav {
        path: PathBuf,
        #[source]
        source: WavError,
    },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Core(#[from] aviary_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => exit::CONFIG,
            AppError::Io { .. } => exit::IO,
            AppError::Wav { .. } | AppError::Format(_) => exit::FORMAT,
            AppError::Core(aviary_core::Error::Config(_)) => exit::CONFIG,
            AppError::Core(_) => exit::INTERNAL,
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
