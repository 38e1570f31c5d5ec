//! Shared domain types: network constants, sharding state, verifiers and
//! contents, plus the node partitioning rules.
//!
//! Units: sizes are bits (1 MB = 10^6 bytes = 8×10^6 bits), rates are bits per
//! second, times are seconds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pos::select_leader;
use crate::rng::Rng;
use crate::vector;

/// Bits in one (decimal) megabyte.
pub const MEGABYTE_BITS: u64 = 8_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContentId(pub u64);

/// Exogenous constants and scenario parameters of one simulated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Shard (re)formation latency, seconds.
    pub config_latency: f64,
    /// Per-message validation delay, seconds.
    pub validation_delay: f64,
    /// Largest message size, bits.
    pub avg_message_size_max: u64,
    /// Upper end of the per-round semantic processing time, seconds.
    pub semantic_time_max: f64,
    /// Lower end of the transmission rate, bits/second.
    pub rate_min: f64,
    /// Upper end of the transmission rate, bits/second.
    pub rate_max: f64,
    pub nodes_initial: usize,
    /// Transaction size, bits.
    pub tx_size: u64,
    pub message_size_min: u64,
    pub message_size_step: u64,
    pub min_shard_size: usize,
    pub accuracy_threshold: f64,
    pub rounds_per_episode: usize,
    pub seed: u64,
    /// Lower clip of the node-count random walk.
    pub nodes_min: usize,
    /// Upper clip of the node-count random walk; also the observation scale for N.
    pub nodes_max: usize,
    /// Per-round node-count change is uniform in `[-node_drift, +node_drift]`.
    pub node_drift: usize,
    /// Throughput (tps) is divided by this to form the reward.
    pub reward_scale: f64,
    /// Standard deviation of the per-component verification noise.
    pub noise_sigma: f64,
    /// Dimension of knowledge and semantic vectors.
    pub semantic_dim: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            config_latency: 0.001,
            validation_delay: 0.1,
            avg_message_size_max: MEGABYTE_BITS,
            semantic_time_max: 20.0,
            rate_min: 10e6,
            rate_max: 100e6,
            nodes_initial: 100,
            tx_size: 4_000,
            message_size_min: 800_000,
            message_size_step: 800_000,
            min_shard_size: 4,
            accuracy_threshold: 0.8,
            rounds_per_episode: 100,
            seed: 0,
            nodes_min: 50,
            nodes_max: 600,
            node_drift: 5,
            reward_scale: 1000.0,
            noise_sigma: 0.5,
            semantic_dim: vector::DEFAULT_DIM,
        }
    }
}

fn positive(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            key,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn nonzero(key: &'static str, v: u64) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::config(key, "must be > 0"))
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        positive("config_latency", self.config_latency)?;
        positive("validation_delay", self.validation_delay)?;
        positive("semantic_time_max", self.semantic_time_max)?;
        positive("rate_min", self.rate_min)?;
        positive("rate_max", self.rate_max)?;
        positive("reward_scale", self.reward_scale)?;
        nonzero("avg_message_size_max", self.avg_message_size_max)?;
        nonzero("tx_size", self.tx_size)?;
        nonzero("message_size_min", self.message_size_min)?;
        nonzero("message_size_step", self.message_size_step)?;
        nonzero("rounds_per_episode", self.rounds_per_episode as u64)?;
        nonzero("semantic_dim", self.semantic_dim as u64)?;
        if self.rate_min > self.rate_max {
            return Err(Error::config("rate_max", "must be >= rate_min"));
        }
        if self.message_size_min > self.avg_message_size_max {
            return Err(Error::config(
                "message_size_min",
                "must be <= avg_message_size_max",
            ));
        }
        if self.tx_size > self.message_size_min {
            return Err(Error::config("tx_size", "must be <= message_size_min"));
        }
        if self.min_shard_size < 4 {
            return Err(Error::config(
                "min_shard_size",
                "must be >= 4 (smallest shard tolerating one fault)",
            ));
        }
        if !(0.0..=1.0).contains(&self.accuracy_threshold) {
            return Err(Error::config("accuracy_threshold", "must lie in [0, 1]"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::config("noise_sigma", "must be finite and >= 0"));
        }
        if self.nodes_min < self.min_shard_size {
            return Err(Error::config("nodes_min", "must be >= min_shard_size"));
        }
        if self.nodes_min > self.nodes_max {
            return Err(Error::config("nodes_max", "must be >= nodes_min"));
        }
        if self.nodes_initial > self.nodes_max {
            return Err(Error::config(
                "nodes_initial",
                format!(
                    "{} exceeds nodes_max {}",
                    self.nodes_initial, self.nodes_max
                ),
            ));
        }
        if self.nodes_initial < self.nodes_min {
            return Err(Error::config(
                "nodes_initial",
                format!(
                    "{} is below nodes_min {}",
                    self.nodes_initial, self.nodes_min
                ),
            ));
        }
        Ok(())
    }

    /// Largest shard count allowed for `nodes` verifiers.
    pub fn max_shards(&self, nodes: usize) -> usize {
        nodes / self.min_shard_size
    }
}

/// Consensus protocol run inside each shard. Only PBFT has a defined
/// propagation cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ConsensusAlgorithm {
    #[default]
    Pbft,
}

impl ConsensusAlgorithm {
    pub const COUNT: usize = 1;

    pub fn index(self) -> usize {
        match self {
            ConsensusAlgorithm::Pbft => 0,
        }
    }
}

/// Balanced split of `nodes` into `shards`; the first `nodes % shards` shards
/// get one extra node.
pub fn partition(nodes: usize, shards: usize, min_shard_size: usize) -> Result<Vec<usize>> {
    if shards == 0 || min_shard_size == 0 || shards > nodes / min_shard_size {
        return Err(Error::InvalidSharding(format!(
            "{shards} shards of at least {min_shard_size} nodes cannot be formed from {nodes} nodes"
        )));
    }
    let base = nodes / shards;
    let extra = nodes % shards;
    Ok((0..shards).map(|i| base + usize::from(i < extra)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clamped {
    pub num_shards: usize,
    pub message_size: u64,
    pub clamped: bool,
}

/// Clip a shard count and message size into the valid range for `nodes`.
pub fn clamp_sharding(
    num_shards: usize,
    message_size: u64,
    nodes: usize,
    cfg: &NetworkConfig,
) -> Clamped {
    let k_max = cfg.max_shards(nodes).max(1);
    let k = num_shards.clamp(1, k_max);
    let s = message_size.clamp(cfg.message_size_min, cfg.avg_message_size_max);
    Clamped {
        num_shards: k,
        message_size: s,
        clamped: k != num_shards || s != message_size,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShardingState {
    num_shards: usize,
    message_size: u64,
    shard_sizes: Vec<usize>,
    leader_ids: Vec<NodeId>,
    consensus: ConsensusAlgorithm,
}

impl ShardingState {
    /// Build the state for `nodes` verifiers with ids `0..nodes` assigned to
    /// shards in contiguous blocks. Each shard's leader rotates with `round`.
    pub fn new(
        nodes: usize,
        num_shards: usize,
        message_size: u64,
        round: u64,
        cfg: &NetworkConfig,
    ) -> Result<Self> {
        if message_size < cfg.message_size_min || message_size > cfg.avg_message_size_max {
            return Err(Error::InvalidSharding(format!(
                "message size {message_size} outside [{}, {}]",
                cfg.message_size_min, cfg.avg_message_size_max
            )));
        }
        let shard_sizes = partition(nodes, num_shards, cfg.min_shard_size)?;
        let mut leader_ids = Vec::with_capacity(num_shards);
        let mut first = 0u64;
        for &size in &shard_sizes {
            let members: Vec<NodeId> = (first..first + size as u64).map(NodeId).collect();
            leader_ids.push(select_leader(&members, round)?);
            first += size as u64;
        }
        Ok(Self {
            num_shards,
            message_size,
            shard_sizes,
            leader_ids,
            consensus: ConsensusAlgorithm::Pbft,
        })
    }

    pub fn num_shards(&self) -> usize {
        self.num_shards
    }

    pub fn message_size(&self) -> u64 {
        self.message_size
    }

    pub fn shard_sizes(&self) -> &[usize] {
        &self.shard_sizes
    }

    pub fn leader_ids(&self) -> &[NodeId] {
        &self.leader_ids
    }

    pub fn consensus(&self) -> ConsensusAlgorithm {
        self.consensus
    }

    pub fn total_nodes(&self) -> usize {
        self.shard_sizes.iter().sum()
    }

    pub fn largest_shard(&self) -> usize {
        self.shard_sizes.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifierNode {
    pub id: NodeId,
    knowledge: Vec<f64>,
    pub balance: u64,
}

impl VerifierNode {
    /// `knowledge` is normalized to unit length.
    pub fn new(id: NodeId, knowledge: &[f64], balance: u64) -> Result<Self> {
        Ok(Self {
            id,
            knowledge: vector::normalize(knowledge)?,
            balance,
        })
    }

    /// A verifier whose knowledge is `truth` blurred by isotropic noise of
    /// scale `spread`; larger spread means weaker alignment.
    pub fn near(
        id: NodeId,
        truth: &[f64],
        spread: f64,
        balance: u64,
        rng: &mut Rng,
    ) -> Result<Self> {
        let blurred: Vec<f64> = truth.iter().map(|t| t + spread * rng.gaussian()).collect();
        Self::new(id, &blurred, balance)
    }

    pub fn knowledge(&self) -> &[f64] {
        &self.knowledge
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Content {
    pub id: ContentId,
    truth: Vec<f64>,
    pub reward_pool: u64,
    pub bond: u64,
}

impl Content {
    pub fn new(id: ContentId, truth: &[f64], reward_pool: u64, bond: u64) -> Result<Self> {
        Ok(Self {
            id,
            truth: vector::normalize(truth)?,
            reward_pool,
            bond,
        })
    }

    pub fn random(id: ContentId, dim: usize, reward_pool: u64, bond: u64, rng: &mut Rng) -> Self {
        Self {
            id,
            truth: vector::random_unit(dim, rng),
            reward_pool,
            bond,
        }
    }

    pub fn truth(&self) -> &[f64] {
        &self.truth
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        assert_eq!(partition(100, 10, 4).unwrap(), vec![10; 10]);
        let mut expected = vec![11];
        expected.extend([10; 9]);
        assert_eq!(partition(101, 10, 4).unwrap(), expected);
        assert!(matches!(partition(7, 2, 4), Err(Error::InvalidSharding(_))));
        assert!(partition(100, 0, 4).is_err());
    }

    #[test]
    fn clamp_examples() {
        let cfg = NetworkConfig::default();
        let c = clamp_sharding(30, MEGABYTE_BITS, 100, &cfg);
        assert_eq!((c.num_shards, c.clamped), (25, true));
        let c = clamp_sharding(5, 0, 100, &cfg);
        assert_eq!((c.message_size, c.clamped), (cfg.message_size_min, true));
        let c = clamp_sharding(5, 8_000_000, 100, &cfg);
        assert_eq!(
            (c.num_shards, c.message_size, c.clamped),
            (5, 8_000_000, false)
        );
        let c = clamp_sharding(0, 8_000_000, 100, &cfg);
        assert_eq!((c.num_shards, c.clamped), (1, true));
    }

    #[test]
    fn default_config_is_valid() {
        NetworkConfig::default().validate().unwrap();
    }

    #[test]
    fn config_validation_names_key() {
        let cfg = NetworkConfig {
            nodes_initial: 601,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidConfig {
                key: "nodes_initial",
                ..
            })
        ));
        let cfg = NetworkConfig {
            rate_min: 2e8,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidConfig {
                key: "rate_max",
                ..
            })
        ));
        let cfg = NetworkConfig {
            min_shard_size: 3,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidConfig {
                key: "min_shard_size",
                ..
            })
        ));
    }

    #[test]
    fn sharding_state_leaders_rotate_within_shards() {
        let cfg = NetworkConfig::default();
        let s0 = ShardingState::new(101, 10, MEGABYTE_BITS, 0, &cfg).unwrap();
        assert_eq!(s0.total_nodes(), 101);
        assert_eq!(s0.largest_shard(), 11);
        assert_eq!(s0.leader_ids()[0], NodeId(0));
        assert_eq!(s0.leader_ids()[1], NodeId(11));
        let s3 = ShardingState::new(101, 10, MEGABYTE_BITS, 3, &cfg).unwrap();
        assert_eq!(s3.leader_ids()[0], NodeId(3));
        let s11 = ShardingState::new(101, 10, MEGABYTE_BITS, 11, &cfg).unwrap();
        assert_eq!(s11.leader_ids()[0], NodeId(0));
        assert_eq!(s11.leader_ids()[1], NodeId(12));
    }

    #[test]
    fn sharding_state_rejects_out_of_range_message() {
        let cfg = NetworkConfig::default();
        assert!(ShardingState::new(100, 5, 1, 0, &cfg).is_err());
        assert!(ShardingState::new(100, 26, MEGABYTE_BITS, 0, &cfg).is_err());
    }
}
