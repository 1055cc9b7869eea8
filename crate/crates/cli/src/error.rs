use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Invalid configuration, located by line and field where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: Option<PathBuf>,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.file, self.line) {
            (Some(file), Some(line)) => write!(f, "{}:{line}: ", file.display())?,
            (Some(file), None) => write!(f, "{}: ", file.display())?,
            (None, Some(line)) => write!(f, "line {line}: ")?,
            (None, None) => {}
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: guenterlab::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed report: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Attaches context to core errors.
pub trait Context<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for guenterlab::Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: context(), source })
    }
}
