use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("missing required column(s): {}", .missing.join(", "))]
    Schema { missing: Vec<String> },

    #[error("row {row}, column `{column}`: cannot parse {value:?} as a number")]
    Parse {
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        value: String,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("no data rows")]
    EmptyData,

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("row index {index} out of range for {n_rows} rows")]
    IndexOutOfRange { index: usize, n_rows: usize },

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate split: {train} train rows, {validation} validation rows")]
    DegenerateSplit { train: usize, validation: usize },

    #[error("invalid hyperparameter: {0}")]
    InvalidConfig(String),

    #[error("k = {k} exceeds the {n_train} training rows")]
    KTooLarge { k: usize, n_train: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("linear system is not positive definite (pivot {pivot} = {value:e})")]
    SingularSystem { pivot: usize, value: f64 },

    #[error("target is constant; R² is undefined")]
    ConstantTarget,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vectors are empty")]
    EmptyVectors,

    #[error("need 2 <= k <= n for k-fold, got k = {k}, n = {n}")]
    BadK { k: usize, n: usize },

    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: Box<Error> },

    #[error("every model failed")]
    AllModelsFailed,

    #[error("unsupported model family `{0}` for this operation")]
    UnsupportedFamily(String),

    #[error("unsupported document format_version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("{0}")]
    Json(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Whether the error comes from bad input (as opposed to a failed computation).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Schema { .. }
                | Error::Parse { .. }
                | Error::Csv(_)
                | Error::EmptyData
                | Error::UnknownColumn(_)
                | Error::InvalidConfig(_)
                | Error::FormatVersion { .. }
                | Error::Json(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}
