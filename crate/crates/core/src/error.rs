use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file contains no data rows")]
    EmptyFile { path: PathBuf },
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}, column {column}: value is not finite")]
    NonFinite { row: usize, column: usize },
    #[error("invalid dataset preset: {0}")]
    InvalidPreset(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid cluster count k={k} for {n} objects (need 1 <= k <= n)")]
    InvalidK { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {required} objects, dataset has {n}")]
    TooFewObjects { n: usize, required: usize },
    #[error("all objects are identical; pairwise distances are all zero")]
    IdenticalObjects,
    #[error("centroids {i} and {j} coincide; cluster separation is zero")]
    CoincidentCentroids { i: usize, j: usize },
    #[error("cluster {cluster} has no members")]
    EmptyCluster { cluster: usize },
    #[error("label sequences differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("could not place {k} blob centers {separation} apart after {attempts} attempts")]
    BlobPlacement {
        k: usize,
        separation: f64,
        attempts: usize,
    },
    #[error("invalid report: {0}")]
    InvalidReport(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Data,
    Parameter,
    Degenerate,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } => ErrorCategory::Io,
            Error::EmptyFile { .. }
            | Error::RaggedRow { .. }
            | Error::NonNumeric { .. }
            | Error::NonFinite { .. }
            | Error::InvalidDataset(_)
            | Error::InvalidReport(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorCategory::Data,
            Error::InvalidPreset(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidK { .. }
            | Error::InvalidParameter(_)
            | Error::TooFewObjects { .. }
            | Error::LengthMismatch { .. } => ErrorCategory::Parameter,
            Error::IdenticalObjects
            | Error::CoincidentCentroids { .. }
            | Error::EmptyCluster { .. }
            | Error::BlobPlacement { .. } => ErrorCategory::Degenerate,
        }
    }
}
