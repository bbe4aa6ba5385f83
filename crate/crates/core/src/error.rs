use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input model: {0}")]
    InvalidModel(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid window ({t1}, {t2}] for horizon {horizon}")]
    InvalidWindow { t1: f64, t2: f64, horizon: f64 },
    #[error("invalid point process: {0}")]
    InvalidProcess(String),
    #[error("codebook too large: {requested} codeword blocks exceeds the cap of {cap}")]
    CodebookTooLarge { requested: u128, cap: u128 },
    #[error("inconsistent configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
