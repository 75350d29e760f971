use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("unknown {kind} `{name}` (known: {known})")]
    Unknown {
        kind: &'static str,
        name: String,
        known: String,
    },
    #[error("parameter `{name}` out of range: {detail}")]
    Parameter { name: String, detail: String },
    #[error("non-finite sample at r = {radius}: {what}")]
    NonFinite { what: String, radius: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn param_err(name: &str, detail: impl Into<String>) -> LabError {
    LabError::Parameter {
        name: name.to_string(),
        detail: detail.into(),
    }
}
