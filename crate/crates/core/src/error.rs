use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} needs {required} elements but the budget is {budget}")]
    Resource {
        what: &'static str,
        required: usize,
        budget: usize,
    },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidInput(msg.into())
    }

    /// Process exit code: 2 for unusable input, 3 for non-convergence,
    /// 1 for i/o trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::InvalidInput(_) | LabError::Resource { .. } | LabError::Parse { .. } => 2,
            LabError::Convergence { .. } => 3,
            LabError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
