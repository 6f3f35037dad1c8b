use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register size mismatch: {left} vs {right} qubits")]
    RegisterMismatch { left: usize, right: usize },

    #[error("register of {0} qubits is too large for a dense matrix (max 12)")]
    RegisterTooLarge(usize),

    #[error("observable is not Hermitian (max imaginary coefficient {0:e})")]
    NotHermitian(f64),

    #[error("invalid Pauli text at line {line}: {reason}")]
    PauliParse { line: usize, reason: String },

    #[error("unsupported element `{0}`")]
    UnsupportedElement(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("SCF did not converge after {0} iterations")]
    ScfNotConverged(usize),

    #[error("FCIDUMP parse error at line {line}: {reason}")]
    FcidumpParse { line: usize, reason: String },

    #[error("spin-orbital index {index} out of range for {n} modes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid basis-state label `{0}`")]
    BadLabel(String),

    #[error("state size mismatch: {left} vs {right} qubits")]
    StateMismatch { left: usize, right: usize },

    #[error("excitation space is empty: {0}")]
    EmptyExcitationSpace(String),

    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { got: usize, expected: usize },

    #[error("initial states are not mutually orthogonal (|overlap| = {0:e})")]
    NonOrthogonalInitialStates(f64),

    #[error("invalid objective specification: {0}")]
    InvalidObjective(String),

    #[error("objective returned a non-finite value {value} at theta = {theta:?}")]
    NonFinite { value: f64, theta: Vec<f64> },

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizer(String),

    #[error("no eigenvalue in the requested sector ({0})")]
    EmptySector(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
