use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP line {line}: {msg}")]
    Fcidump { line: usize, msg: String },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("degenerate denominator {value:e} for excitation {excitation}")]
    DegenerateDenominator { excitation: String, value: f64 },

    #[error("parameter count {got} does not match ansatz length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("observable is not Hermitian (max anti-Hermitian coefficient {0:e})")]
    NonHermitian(f64),

    #[error("{qubits} qubits exceeds the dense limit of {limit}")]
    DimensionTooLarge { qubits: usize, limit: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
