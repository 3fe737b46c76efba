use std::path::PathBuf;

use thiserror::Error;

/// Exit codes of the `ckg` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const STALLED: i32 = 2;
    pub const LEFT_INTERVAL: i32 = 3;
    /// A check, certificate or verification did not pass.
    pub const FAILED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid problem file; `pointer` is a JSON pointer into the file.
    #[error("{pointer}: {message}")]
    Input { pointer: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] ckg_core::Error),
}

impl CliError {
    pub fn input(pointer: &str, message: impl Into<String>) -> Self {
        Self::Input {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
