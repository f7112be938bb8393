use std::path::PathBuf;

use thiserror::Error;

use crate::doc_model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },

    #[error("schema violation in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("document failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("unknown document `{0}`")]
    UnknownDocument(String),

    #[error("document `{0}` is already indexed")]
    DuplicateDocument(String),

    #[error("test case `{case_id}` refers to missing document `{doc_id}`")]
    MissingCaseDocument { case_id: String, doc_id: String },

    #[error("invalid test case `{case_id}`: {message}")]
    InvalidCase { case_id: String, message: String },

    #[error("index version mismatch: expected {expected}, found {found}")]
    IndexVersion { expected: u32, found: u32 },

    #[error("corrupt index file {}: {message}", .path.display())]
    IndexCorrupt { path: PathBuf, message: String },

    #[error("pair sampling exhausted its retry budget: found {found} of {requested} pairs after {attempts} attempts")]
    SamplingExhausted {
        found: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("invalid plant spec: {0}")]
    InvalidPlantSpec(String),

    #[error("unknown output format `{0}`")]
    UnknownFormat(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a reference to something that does not exist.
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            Error::UnknownDocument(_) | Error::MissingCaseDocument { .. }
        ) || matches!(self, Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
