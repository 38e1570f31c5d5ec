//! Oracle proof-of-semantic: simulated verification, off-chain aggregation,
//! interactive challenges, commitment proofs, token accounting and the
//! consensus on sharding settings.

mod aggregation;
mod challenge;
mod commitment;
mod ledger;
mod setting;
mod verification;

pub use aggregation::{distribute_rewards, offchain_aggregate, AggregationReport, RewardSplit};
pub use challenge::{interactive_challenge, ChallengeOutcome, Party};
pub use commitment::{
    commit, encode_vector, verify_commitment, Commitment, CommitmentScheme, ProofScheme,
};
pub use ledger::Ledger;
pub use setting::{propose_setting, quorum, ratify_setting, Ratification, SettingMessage, Voter};
pub use verification::{score_accuracy, select_leader, simulate_verification, SemanticResult};
