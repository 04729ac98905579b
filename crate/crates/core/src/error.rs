use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Computation,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Computation => "computation",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset not found: {0}")]
    DatasetNotFound(PathBuf),

    #[error("schema config not found: {0}")]
    SchemaNotFound(PathBuf),

    #[error("invalid schema config: {0}")]
    Schema(String),

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("no data rows")]
    NoDataRows,

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty count table for scope {0:?}")]
    EmptyCountTable(String),

    #[error("k = {k} is out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("curve needs at least 2 points, got {0}")]
    CurveTooShort(usize),

    #[error("class {class} has {count} member(s); at least 2 are needed to interpolate")]
    ClassTooSmall { class: usize, count: usize },

    #[error("needs >= 2 classes, found {0}")]
    TooFewClasses(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("unsupported model file version {0}")]
    ModelVersion(u32),

    #[error("{0}")]
    Computation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::SchemaNotFound(_) | Error::Schema(_) | Error::InvalidArgument(_) => {
                ErrorKind::Config
            }
            Error::DatasetNotFound(_)
            | Error::MissingColumn(_)
            | Error::NoDataRows
            | Error::UnknownLabel(_)
            | Error::EmptyCountTable(_)
            | Error::ClassTooSmall { .. }
            | Error::TooFewClasses(_)
            | Error::DimensionMismatch { .. }
            | Error::ModelVersion(_)
            | Error::Io { .. }
            | Error::Csv(_) => ErrorKind::Data,
            Error::KOutOfRange { .. }
            | Error::CurveTooShort(_)
            | Error::Diverged { .. }
            | Error::Computation(_)
            | Error::Json(_) => ErrorKind::Computation,
        }
    }
}
