use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("resource limit: {what} needs {qubits} qubits, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        qubits: usize,
        cap: usize,
    },

    #[error("vector not normalized: norm {norm}")]
    Normalization { norm: f64 },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("measurement on a numerically dead branch (probability {probability:e})")]
    MeasurementDegenerate { probability: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
