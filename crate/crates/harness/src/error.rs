use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: nanowire_core::Error,
    },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl HarnessError {
    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::MissingColumn { .. } => 3,
            Self::Validation(_) => 4,
            Self::Solver { .. } => 5,
            Self::Io { .. } | Self::Csv { .. } | Self::Json { .. } => 6,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

/// Attaches scenario context to solver errors.
pub(crate) trait SolverContext<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> SolverContext<T> for nanowire_core::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| match source {
            nanowire_core::Error::InvalidParameter { .. } => HarnessError::Validation(format!("{what}: {source}")),
            source => HarnessError::Solver {
                context: what.to_string(),
                source,
            },
        })
    }
}
