use thiserror::Error;

/// Failures surfaced by the command-line layer, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed arguments: bad distribution spec, unknown parameter, etc.
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Compute(fisher_core::Error),

    /// `reproduce` ran to completion but some claims failed.
    #[error("{failed} of {total} reproduction claims failed")]
    ClaimsFailed { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<fisher_core::Error> for CliError {
    /// Invalid parameters come from user input; everything else is a
    /// failure of the computation itself.
    fn from(e: fisher_core::Error) -> Self {
        match e {
            fisher_core::Error::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
