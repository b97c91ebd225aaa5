use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm² {0})")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("{what} did not converge (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not one of the four standard Bell states (best fidelity {0})")]
    NotBellState(f64),

    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    QubitIndex { index: usize, qubits: usize },

    #[error("term {0} cannot be measured in any single-letter-per-qubit setting")]
    UncoverableTerm(String),

    #[error("spectral gap {0:e} is too small for the accuracy metric")]
    DegenerateGap(f64),

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
