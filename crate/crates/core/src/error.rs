use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RpeError>;

#[derive(Debug, Error)]
pub enum RpeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("response column '{0}' not found")]
    MissingColumn(String),

    #[error("non-numeric cell at row {row}, column '{column}': '{value}'")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column '{column}'")]
    NonFinite { row: usize, column: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{kind} needs at least {required} training samples, got {got}")]
    SampleSize {
        kind: &'static str,
        required: usize,
        got: usize,
    },

    /// Indices are 1-based.
    #[error("NaN holdout score for projection {index}{}", group_suffix(.group))]
    NanScore { group: Option<usize>, index: usize },

    #[error("stage {stage} failed ({context}): {source}")]
    Stage {
        stage: usize,
        context: String,
        #[source]
        source: Box<RpeError>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn group_suffix(group: &Option<usize>) -> String {
    group.map(|g| format!(" in group {g}")).unwrap_or_default()
}

impl RpeError {
    /// Whether the error stems from bad user input (as opposed to a failure
    /// while computing).
    pub fn is_usage(&self) -> bool {
        if let RpeError::Stage { source, .. } = self {
            return source.is_usage();
        }
        matches!(
            self,
            RpeError::InvalidInput(_)
                | RpeError::Config(_)
                | RpeError::Io { .. }
                | RpeError::Csv(_)
                | RpeError::MissingColumn(_)
                | RpeError::NonNumeric { .. }
                | RpeError::NonFinite { .. }
                | RpeError::SampleSize { .. }
        )
    }
}
