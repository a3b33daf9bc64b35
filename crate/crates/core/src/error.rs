use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    InvalidInput(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("only {accepted} draws fell inside the conditioning band, need at least {required}")]
    InsufficientAcceptances { accepted: usize, required: usize },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("no valid rows left after filtering {total} rows")]
    EmptyAfterFiltering { total: usize },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("unsupported model file version: {0}")]
    VersionUnsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable kebab-case tag, used by the CLI for machine-parsable errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DegenerateFit(_) => "degenerate-fit",
            Error::InsufficientAcceptances { .. } => "insufficient-acceptances",
            Error::FileNotFound(_) => "file-not-found",
            Error::EmptyAfterFiltering { .. } => "empty-after-filtering",
            Error::SchemaMismatch(_) => "schema-mismatch",
            Error::VersionUnsupported(_) => "version-unsupported",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {x}")))
    }
}
