use std::path::PathBuf;

use thiserror::Error;

/// Exit status when an IDS check raised an alarm.
pub const EXIT_ALARM: i32 = 2;
pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Core {
        scenario: String,
        #[source]
        source: photomesh_core::Error,
    },
}

impl HarnessError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::ConfigInvalid { field: field.into(), message: message.into() }
    }

    pub fn core(scenario: &str, source: photomesh_core::Error) -> Self {
        Self::Core { scenario: scenario.to_owned(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigParse(_) | HarnessError::ConfigInvalid { .. } => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
