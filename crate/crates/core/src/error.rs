use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),
    #[error("degenerate gap: {0}")]
    DegenerateGap(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
