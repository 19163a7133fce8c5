use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("qubit index {index} outside a {n_qubits}-qubit layout")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("refusing to build a dense matrix for {0} qubits (limit 12)")]
    DimensionGuard(usize),

    #[error("term outside the recognized Hamiltonian families: {0}")]
    UnrecognizedTerm(String),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("pole in closed form: {0}")]
    Pole(&'static str),

    #[error("unsupported layout: {0}")]
    UnsupportedLayout(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
