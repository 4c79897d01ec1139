use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node id {node} out of range for {num_nodes} nodes ({context})")]
    NodeOutOfRange {
        node: usize,
        num_nodes: usize,
        context: String,
    },

    #[error("self-loop on node {node} ({context})")]
    SelfLoop { node: usize, context: String },

    #[error("non-finite value {value} ({context})")]
    NonFinite { value: f64, context: String },

    #[error("spin assignment has length {got}, model has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid spin value {value} at position {index}; spins must be +1 or -1")]
    InvalidSpin { index: usize, value: i64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "{what} needs {qubits} qubits ({bytes} bytes of amplitudes) but the cap is {cap} qubits"
    )]
    Resource {
        what: String,
        qubits: usize,
        cap: usize,
        bytes: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn resource(what: impl Into<String>, qubits: usize, cap: usize) -> Self {
        Error::Resource {
            what: what.into(),
            qubits,
            cap,
            bytes: 16u128 << qubits.min(100),
        }
    }
}
