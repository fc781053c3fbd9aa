use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("surface parameters inconsistent with advertised critical structure: {0}")]
    Inconsistent(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("degenerate statistics: {0}")]
    Degenerate(String),
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
