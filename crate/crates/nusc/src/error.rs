use std::path::PathBuf;

/// Errors surfaced by the harness and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Budget(nusc_core::Error),

    #[error(transparent)]
    Core(nusc_core::Error),

    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        HarnessError::Config { field: field.into(), message: message.to_string() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for configuration problems, 3 for budget overruns.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Format { .. } => 2,
            HarnessError::Core(nusc_core::Error::InvalidParameter(_))
            | HarnessError::Core(nusc_core::Error::TrivialCommonPart) => 2,
            HarnessError::Budget(_) => 3,
            _ => 1,
        }
    }
}

impl From<nusc_core::Error> for HarnessError {
    fn from(e: nusc_core::Error) -> Self {
        match e {
            nusc_core::Error::BudgetExceeded { .. } => HarnessError::Budget(e),
            other => HarnessError::Core(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
