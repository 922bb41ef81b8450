use thiserror::Error;

pub type Result<T> = std::result::Result<T, IrgmError>;

#[derive(Debug, Error)]
pub enum IrgmError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("system too large for exhaustive enumeration: N = {n} exceeds the cap of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("misuse: {0}")]
    Misuse(String),
    #[error("index {index} out of range for {len} defects")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}
