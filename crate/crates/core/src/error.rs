use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator norm {0} exceeds 1")]
    NormTooLarge(f64),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("photon number mismatch: input has {input}, output has {output}")]
    PhotonMismatch { input: usize, output: usize },

    #[error("basis mismatch between distributions")]
    BasisMismatch,

    #[error("zero heralding probability")]
    ZeroHeraldProbability,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
