use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("rename cycle detected: {}", .0.join(" -> "))]
    RenameCycle(Vec<String>),

    #[error("conflicting renames for {old:?}: {first:?} and {second:?}")]
    ConflictingRename { old: String, first: String, second: String },

    #[error("expected exactly 3 years, got {0}")]
    YearCount(usize),

    #[error("year labels must be strictly ordered: {0:?}")]
    YearOrder(Vec<String>),

    #[error("no node is actively citing in all three years")]
    EmptyIntersection,

    #[error("matrix {0:?} has no citations")]
    EmptyMatrix(String),

    #[error("empty value set")]
    EmptyValues,

    #[error("no cell has citations in all three years")]
    EmptyTriangle,

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("cell ({citing}, {cited}) is in the transition mask but has no prior frequency")]
    MaskViolation { citing: u32, cited: u32 },

    #[error("direction mismatch: {0}")]
    DirectionMismatch(String),

    #[error("node {0} has no community assignment")]
    MissingAssignment(usize),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("unknown {kind} {name:?} (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit status for this error: 1 configuration, 2 data, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownStrategy { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
