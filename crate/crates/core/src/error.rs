use thiserror::Error;

#[derive(Debug, Error)]
pub enum RaiError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("infeasible uncertainty set: {0}")]
    Infeasible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RaiError {
    /// Stable short tag used in machine-parseable CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            RaiError::InvalidSpec(_) => "invalid-spec",
            RaiError::InvalidArgument(_) => "invalid-argument",
            RaiError::InvalidDataset(_) => "invalid-dataset",
            RaiError::Parse { .. } => "parse",
            RaiError::DimensionMismatch { .. } => "dimension-mismatch",
            RaiError::Numeric(_) => "numeric",
            RaiError::Infeasible(_) => "infeasible",
            RaiError::Domain(_) => "domain",
            RaiError::Config(_) => "config",
            RaiError::Io(_) => "io",
            RaiError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, RaiError>;
