use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("Werner parameter q = {0} outside [-1/3, 1]")]
    WernerOutOfRange(f64),
    #[error("count data: {0}")]
    InvalidCounts(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fit undefined: {0}")]
    UndefinedFit(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
