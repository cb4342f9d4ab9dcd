use thiserror::Error;

/// Errors produced by `pwca-core`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("at least two views are required, got {0}")]
    TooFewViews(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenpair {index} has relative residual {residual:e} above tolerance {tolerance:e}")]
    ResidualTooLarge {
        index: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("embedding has no components")]
    EmptyEmbedding,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("sample size {n} is too small, the bound requires n >= 8")]
    SampleSizeTooSmall { n: usize },

    #[error("sample {index} ({z}, {y}) lies outside the grid")]
    SampleOutOfGrid { index: usize, z: f64, y: f64 },

    #[error("no hypothesis has empirical risk <= {epsilon}")]
    Infeasible { epsilon: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid synthetic configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("inconsistent reports: {0}")]
    InconsistentReports(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Broad failure classes, used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Caller supplied an invalid parameter.
    Usage,
    /// Input data is malformed, inconsistent, or violates a precondition.
    Data,
    /// A numerical routine failed.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotPositiveDefinite { .. }
            | Error::ResidualTooLarge { .. }
            | Error::Infeasible { .. } => ErrorClass::Numerical,
            Error::InvalidParameter(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    /// Stable snake_case identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NonFinite(_) => "non_finite",
            Error::TooFewViews(_) => "too_few_views",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ResidualTooLarge { .. } => "residual_too_large",
            Error::EmptyEmbedding => "empty_embedding",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::EmptyInput(_) => "empty_input",
            Error::OutOfRange(_) => "out_of_range",
            Error::SampleSizeTooSmall { .. } => "sample_size_too_small",
            Error::SampleOutOfGrid { .. } => "sample_out_of_grid",
            Error::Infeasible { .. } => "infeasible",
            Error::Parse { .. } => "parse",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidSplit(_) => "invalid_split",
            Error::NegativeEntry { .. } => "negative_entry",
            Error::InconsistentReports(_) => "inconsistent_reports",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
