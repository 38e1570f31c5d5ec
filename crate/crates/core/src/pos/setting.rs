use crate::model::{clamp_sharding, partition, NetworkConfig, NodeId, ShardingState};

/// A sharding setting packaged by the leader for the other verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SettingMessage {
    pub leader: NodeId,
    pub num_shards: usize,
    pub message_size: u64,
    pub nodes: usize,
}

pub fn propose_setting(leader: NodeId, setting: &ShardingState) -> SettingMessage {
    SettingMessage {
        leader,
        num_shards: setting.num_shards(),
        message_size: setting.message_size(),
        nodes: setting.total_nodes(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Voter {
    /// Re-checks the setting bounds and votes accordingly.
    Honest,
    /// Rejects every proposal.
    Faulty,
}

impl Voter {
    pub fn vote(self, msg: &SettingMessage, cfg: &NetworkConfig) -> bool {
        match self {
            Voter::Honest => {
                !clamp_sharding(msg.num_shards, msg.message_size, msg.nodes, cfg).clamped
                    && partition(msg.nodes, msg.num_shards, cfg.min_shard_size).is_ok()
            }
            Voter::Faulty => false,
        }
    }
}

/// Votes needed among `n` verifiers: `ceil(2n/3)`.
pub fn quorum(n: usize) -> usize {
    (2 * n).div_ceil(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratification {
    pub accepted: bool,
    pub votes: usize,
    pub quorum: usize,
}

pub fn ratify_setting(msg: &SettingMessage, voters: &[Voter], cfg: &NetworkConfig) -> Ratification {
    let votes = voters.iter().filter(|v| v.vote(msg, cfg)).count();
    let quorum = quorum(voters.len());
    Ratification {
        accepted: !voters.is_empty() && votes >= quorum,
        votes,
        quorum,
    }
}
