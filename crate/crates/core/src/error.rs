use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("required polynomial degree {needed} exceeds the limit {limit}")]
    DegreeOverflow { needed: usize, limit: usize },

    #[error(
        "spectral factorization failed ({0}); reduce the degree or move the \
         polynomial further away from |P| = 1"
    )]
    Factorization(String),

    #[error("polynomial violates QSP condition {condition}: {detail}")]
    QspCondition { condition: &'static str, detail: String },

    #[error("phase finding did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit {qubit} out of range for a {qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, qubits: usize },

    #[error("{qubits} qubits exceeds the simulator limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },

    #[error("not a projector: {0}")]
    NotProjector(String),

    #[error("amplitude table has zero norm (gamma = 0)")]
    ZeroAmplitude,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
