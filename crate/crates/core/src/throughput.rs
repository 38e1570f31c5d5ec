//! Round latency and transaction throughput of a sharded verifier network.
//!
//! A round runs every shard's PBFT instance in parallel, so the largest shard
//! bounds the intra-shard time. The round then pays one main-chain submission
//! (message size over rate) and, when the sharding changed, the shard
//! formation latency.

use crate::model::{NetworkConfig, ShardingState};

/// Exogenous conditions of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundConditions {
    /// Transmission rate, bits/second.
    pub rate: f64,
    /// Semantic processing time, seconds.
    pub semantic_time: f64,
    /// The shard layout changed this round.
    pub reconfigured: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    pub t_config: f64,
    pub t_prop: f64,
    pub t_intra: f64,
    pub t_inter: f64,
    pub t_round: f64,
}

/// PBFT message propagation inside one shard of `shard_size` nodes:
/// `2·n·(n−1)·S/R`.
pub fn propagation_time(shard_size: usize, message_bits: f64, rate: f64) -> f64 {
    let n = shard_size as f64;
    2.0 * n * (n - 1.0) * message_bits / rate
}

pub fn round_latency(
    state: &ShardingState,
    cond: &RoundConditions,
    cfg: &NetworkConfig,
) -> LatencyBreakdown {
    let s = state.message_size() as f64;
    let t_prop = propagation_time(state.largest_shard(), s, cond.rate);
    let t_intra = t_prop + cfg.validation_delay + cond.semantic_time;
    let t_inter = s / cond.rate;
    let t_config = if cond.reconfigured {
        cfg.config_latency
    } else {
        0.0
    };
    LatencyBreakdown {
        t_config,
        t_prop,
        t_intra,
        t_inter,
        t_round: t_config + t_intra + t_inter,
    }
}

/// Transactions per second: every shard commits one message of `S` bits per
/// round.
pub fn throughput(state: &ShardingState, lat: &LatencyBreakdown, cfg: &NetworkConfig) -> f64 {
    let txs_per_message = state.message_size() as f64 / cfg.tx_size as f64;
    state.num_shards() as f64 * txs_per_message / lat.t_round
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MEGABYTE_BITS;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn propagation_examples() {
        assert!(close(propagation_time(10, 8e6, 1e7), 144.0, 1e-12));
        assert_eq!(propagation_time(1, 123.0, 4.0), 0.0);
        assert!(close(propagation_time(4, 8e6, 1e7), 19.2, 1e-12));
    }

    #[test]
    fn latency_and_throughput_examples() {
        let cfg = NetworkConfig::default();
        let state = ShardingState::new(100, 10, MEGABYTE_BITS, 0, &cfg).unwrap();
        let mut cond = RoundConditions {
            rate: 1e7,
            semantic_time: 20.0,
            reconfigured: true,
        };
        let lat = round_latency(&state, &cond, &cfg);
        assert!(close(lat.t_round, 164.901, 1e-12));
        assert!(close(lat.t_intra, 164.1, 1e-12));
        assert!(close(lat.t_inter, 0.8, 1e-12));
        cond.reconfigured = false;
        let lat = round_latency(&state, &cond, &cfg);
        assert!(close(lat.t_round, 164.9, 1e-12));
        assert!((throughput(&state, &lat, &cfg) - 121.28).abs() < 0.01);

        let state = ShardingState::new(100, 25, MEGABYTE_BITS, 0, &cfg).unwrap();
        let lat = round_latency(&state, &cond, &cfg);
        assert!(close(lat.t_round, 40.1, 1e-12));
        assert!((throughput(&state, &lat, &cfg) - 1246.9).abs() < 0.05);
    }

    #[test]
    fn one_transaction_per_round() {
        let cfg = NetworkConfig {
            message_size_min: 4_000,
            ..Default::default()
        };
        let state = ShardingState::new(100, 1, 4_000, 0, &cfg).unwrap();
        let cond = RoundConditions {
            rate: 1e7,
            semantic_time: 3.0,
            reconfigured: false,
        };
        let lat = round_latency(&state, &cond, &cfg);
        assert!(close(
            throughput(&state, &lat, &cfg),
            1.0 / lat.t_round,
            1e-15
        ));
    }

    #[test]
    fn single_shard_at_hundred_nodes() {
        let cfg = NetworkConfig::default();
        let state = ShardingState::new(100, 1, MEGABYTE_BITS, 0, &cfg).unwrap();
        let cond = RoundConditions {
            rate: 1e7,
            semantic_time: 20.0,
            reconfigured: true,
        };
        assert!(close(
            round_latency(&state, &cond, &cfg).t_prop,
            15840.0,
            1e-12
        ));
    }
}
