use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian within tolerance (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires the float64 backend: {0}")]
    RequiresFloat(String),

    #[error("cannot parse rational number from {0:?}")]
    ParseRational(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
