use thiserror::Error;

use crate::job::JobId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("job {job}: {reason}")]
    Validation { job: JobId, reason: String },

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("policy violation at t={time}: {reason}")]
    PolicyViolation { time: i64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scale limit exceeded: {0}")]
    Scale(String),

    #[error("generator spec error: {0}")]
    Spec(String),

    #[error("accounting violation on stack {machine}: {reason}")]
    Accounting { machine: usize, reason: String },

    #[error("arithmetic overflow while {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        }
    }
}
