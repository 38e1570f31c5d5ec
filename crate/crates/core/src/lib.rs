//! Simulator for a sharded oracle verifier network.
//!
//! - [`pos`]: proof-of-semantic aggregation, challenges, commitment proofs and
//!   the token ledger.
//! - [`throughput`]: per-round latency decomposition and transaction rate.
//! - [`env`]: the round-based sharding environment and the static-max
//!   baseline.
//! - [`dqn`]: the Q-learning controller that tunes shard count and message
//!   size.

pub mod dqn;
pub mod env;
pub mod error;
pub mod model;
pub mod pos;
pub mod rng;
pub mod throughput;
pub mod vector;

pub use error::{Error, Result};
pub use model::{
    clamp_sharding, partition, Clamped, ConsensusAlgorithm, Content, ContentId, NetworkConfig,
    NodeId, ShardingState, VerifierNode, MEGABYTE_BITS,
};
pub use rng::Rng;
