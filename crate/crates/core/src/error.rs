use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cavity parameters: {0}")]
    InvalidParams(String),
    #[error("no detector can click: every outcome has zero probability")]
    NoHerald,
    #[error("power-law fit: {0}")]
    Fit(String),
    #[error("invalid qubit register: {0}")]
    Register(String),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("carve pair uses qubit {0} twice")]
    PairCollision(usize),
    #[error("detector {0} does not exist in the {1} protocol")]
    UnknownDetector(String, String),
    #[error("chain of {n} qubits exceeds the exact-register cap: {reason}")]
    RegisterCap { n: usize, reason: String },
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
