use thiserror::Error;

use crate::model::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sharding: {0}")]
    InvalidSharding(String),

    #[error("invalid config `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("no verifiers to choose from")]
    NoVerifiers,

    #[error("no semantic result reached the accuracy threshold {threshold}")]
    AggregationFailure { threshold: f64 },

    #[error("insufficient funds: account {account} holds {balance}, needs {needed}")]
    InsufficientFunds {
        account: NodeId,
        balance: u64,
        needed: u64,
    },

    #[error("result from verifier {0} has not been scored")]
    Unscored(NodeId),

    #[error("episode already finished; call reset")]
    EpisodeFinished,

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key,
            reason: reason.into(),
        }
    }
}
