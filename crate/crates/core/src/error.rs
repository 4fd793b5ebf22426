use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A closed-neighbourhood weight sum vanished, so the division is undefined.
    #[error("not normalizable: node {node} has a zero closed-neighbourhood weight")]
    NonNormalizable { node: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} is limited to {limit}, got {got}")]
    SizeGuard {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("node set is not a maximal independent set")]
    NotMaximalIndependent,

    #[error("maximal independent set has density {0}, at least 2 is required")]
    DensityTooLow(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("graph is not a tree")]
    NotTree,

    #[error("weight of node {0} must be strictly positive")]
    ZeroWeight(usize),

    #[error("zero {kind} {index} during Sinkhorn balancing")]
    ZeroLine { kind: &'static str, index: usize },

    #[error("exponent overflow: max entry / tau = {0} exceeds 700")]
    ExpOverflow(f64),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
