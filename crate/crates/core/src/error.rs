use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid Young function: {0}")]
    InvalidYoung(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("invalid decomposition: {0}")]
    Decomposition(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("rank deficient pair {pair}: smallest singular value ratio {ratio:e}")]
    RankDeficient { pair: String, ratio: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
