use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("training diverged at epoch {epoch}")]
    DivergedTraining { epoch: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("no accepted posterior samples")]
    NoPosterior,
    #[error("no positive labels; F1 is undefined for every cut-off")]
    NoPositiveLabels,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("ingestion error at row {row}, column {column}: {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
