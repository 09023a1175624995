use thiserror::Error;

/// Errors produced by the calibration engine.
#[derive(Error, Debug)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data or configuration failed validation. Each issue is
    /// addressed to the offending row/column where possible.
    #[error("validation failed:\n{}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("numerical failure in {context}: {message}")]
    NumericalFailure { context: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl CoreError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }

    pub fn numerical(context: impl Into<String>, message: impl Into<String>) -> Self {
        CoreError::NumericalFailure {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Config(msg.into())
    }
}

/// A single row/column-addressed problem found while validating inputs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ValidationIssue {
    /// Zero-based row in the offending table, if the issue is row-specific.
    pub row: Option<usize>,
    /// Name of the offending variable or output column, if column-specific.
    pub column: Option<String>,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(row: Option<usize>, column: Option<&str>, message: impl Into<String>) -> Self {
        ValidationIssue {
            row,
            column: column.map(str::to_owned),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.row, &self.column) {
            (Some(r), Some(c)) => write!(f, "row {r}, column {c}: {}", self.message),
            (Some(r), None) => write!(f, "row {r}: {}", self.message),
            (None, Some(c)) => write!(f, "column {c}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, CoreError>;
