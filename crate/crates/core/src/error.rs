use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("artifact {path}: expected {expected} version {expected_version}, found {found}")]
    VersionMismatch {
        path: PathBuf,
        expected: &'static str,
        expected_version: u32,
        found: String,
    },

    #[error("malformed artifact {path} (line {line}): {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("invalid session {session_id}: {reason}")]
    InvalidSession { session_id: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no constant-current phase before the tail (tail begins at sample 0)")]
    NoConstantCurrentPhase,

    #[error("dataset needs both classes, found only {0}")]
    SingleClass(&'static str),

    #[error("insufficient negative pool for {target}: need {needed}, have {available}")]
    InsufficientNegatives {
        target: String,
        needed: usize,
        available: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature names do not match the fitted catalog")]
    FeatureNameMismatch,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short, stable code used by the CLI for machine-parseable errors.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::Malformed { .. } => "malformed_artifact",
            Error::InvalidSeries(_) => "invalid_series",
            Error::InvalidSession { .. } => "invalid_session",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Empty(_) => "empty_input",
            Error::NoConstantCurrentPhase => "no_cc_phase",
            Error::SingleClass(_) => "single_class",
            Error::InsufficientNegatives { .. } => "insufficient_negatives",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::FeatureNameMismatch => "feature_name_mismatch",
            Error::Json(_) => "json",
        }
    }
}
