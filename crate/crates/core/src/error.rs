use thiserror::Error;

/// Errors produced anywhere in the receiver chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible LDPC degree profile: {0}")]
    InfeasibleProfile(String),

    #[error("check degree {degree} needs 2^{} forbidden-set rows, above the 2^15 guard; reduce the row degree", degree - 1)]
    FsEnumerationGuard { degree: usize },

    #[error("candidate list has an empty partition for bit {bit}; radius P must be at least 1")]
    EmptyPartition { bit: usize },

    #[error("full list of 4^{n_t} candidates exceeds the 4096 guard")]
    FullListGuard { n_t: usize },

    #[error("malformed alist: {0}")]
    Alist(String),

    #[error("structurally infeasible SDP: {0}")]
    InfeasibleProblem(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
