use std::collections::BTreeSet;

use super::ledger::Ledger;
use super::verification::{score_accuracy, SemanticResult};
use crate::error::{Error, Result};
use crate::model::{ContentId, NodeId};
use crate::vector;

/// The leader's threshold-filtered aggregate for one content.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationReport {
    pub content_id: ContentId,
    pub aggregated: Vec<f64>,
    pub contributors: BTreeSet<NodeId>,
    pub threshold_used: f64,
}

/// Score every result against `truth`, keep those with accuracy at or above
/// `threshold`, and average the survivors into a unit vector.
pub fn offchain_aggregate(
    results: &mut [SemanticResult],
    truth: &[f64],
    threshold: f64,
) -> Result<AggregationReport> {
    let content_id = match results.first() {
        Some(r) => r.content_id,
        None => return Err(Error::AggregationFailure { threshold }),
    };
    for r in results.iter_mut() {
        vector::check_dims(truth, &r.vector)?;
        score_accuracy(r, truth)?;
    }

    let passing: Vec<&SemanticResult> = results
        .iter()
        .filter(|r| r.accuracy.is_some_and(|a| a >= threshold))
        .collect();
    if passing.is_empty() {
        return Err(Error::AggregationFailure { threshold });
    }

    let mut sum = vec![0.0; truth.len()];
    for r in &passing {
        for (s, x) in sum.iter_mut().zip(&r.vector) {
            *s += x;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / passing.len() as f64).collect();

    Ok(AggregationReport {
        content_id,
        aggregated: vector::normalize(&mean)?,
        contributors: passing.iter().map(|r| r.verifier_id).collect(),
        threshold_used: threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardSplit {
    pub per_contributor: u64,
    /// Returned to the producer.
    pub remainder: u64,
}

/// Pay `pool` from `producer` to the report's contributors in equal integer
/// shares. The indivisible remainder never leaves the producer.
pub fn distribute_rewards(
    report: &AggregationReport,
    producer: NodeId,
    pool: u64,
    ledger: &mut Ledger,
) -> Result<RewardSplit> {
    ledger.ensure_funds(producer, pool)?;
    let n = report.contributors.len() as u64;
    if n == 0 {
        return Ok(RewardSplit {
            per_contributor: 0,
            remainder: pool,
        });
    }
    let share = pool / n;
    for &id in &report.contributors {
        ledger.transfer(producer, id, share)?;
    }
    Ok(RewardSplit {
        per_contributor: share,
        remainder: pool % n,
    })
}
