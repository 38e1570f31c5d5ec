use std::collections::BTreeSet;

use proptest::prelude::*;
use semshard_core::pos::{
    commit, distribute_rewards, interactive_challenge, offchain_aggregate, score_accuracy,
    simulate_verification, verify_commitment, Ledger, SemanticResult,
};
use semshard_core::vector::random_unit;
use semshard_core::{Content, ContentId, Error, NodeId, Rng, VerifierNode};

const PRODUCER: NodeId = NodeId(0);

/// Random mix of aggregation rounds, reward payouts, challenges and raw
/// transfers (some of which overdraw and must fail cleanly).
fn run_sequence(seed: u64, ops: usize) -> Ledger {
    let mut rng = Rng::new(seed);
    let mut ledger = Ledger::new();
    ledger.mint(PRODUCER, 5_000);
    let n = 2 + rng.below(8);
    for id in 1..=n {
        ledger.mint(NodeId(id), rng.below(200));
    }
    let supply = ledger.total_supply();

    for step in 0..ops {
        let content = Content::random(
            ContentId(step as u64),
            8,
            rng.below(300),
            rng.below(50),
            &mut rng,
        );
        let verifiers: Vec<VerifierNode> = (1..=n)
            .map(|id| {
                let spread = rng.uniform_range(0.0, 1.5);
                VerifierNode::near(NodeId(id), content.truth(), spread, 0, &mut rng).unwrap()
            })
            .collect();
        let mut results: Vec<SemanticResult> = verifiers
            .iter()
            .map(|v| simulate_verification(v, &content, 0.5, &mut rng).unwrap())
            .collect();
        match rng.below(3) {
            0 => match offchain_aggregate(&mut results, content.truth(), 0.8) {
                Ok(report) => {
                    let _ = distribute_rewards(&report, PRODUCER, content.reward_pool, &mut ledger);
                }
                Err(e) => assert!(matches!(e, Error::AggregationFailure { .. })),
            },
            1 => {
                for r in &mut results {
                    score_accuracy(r, content.truth()).unwrap();
                }
                let a = rng.below(n) as usize;
                let b = (a + 1 + rng.below(n - 1) as usize) % n as usize;
                let before = ledger.clone();
                match interactive_challenge(&results[a], &results[b], content.bond, &mut ledger) {
                    Ok(out) => {
                        let delta_a = ledger.balance(results[a].verifier_id) as i128
                            - before.balance(results[a].verifier_id) as i128;
                        let delta_b = ledger.balance(results[b].verifier_id) as i128
                            - before.balance(results[b].verifier_id) as i128;
                        assert_eq!(delta_a + delta_b, 0);
                        assert_eq!(delta_a.unsigned_abs(), out.bond_transfer as u128);
                    }
                    Err(e) => {
                        assert!(matches!(e, Error::InsufficientFunds { .. }));
                        assert_eq!(ledger, before);
                    }
                }
            }
            _ => {
                let from = NodeId(rng.below(n + 1));
                let to = NodeId(rng.below(n + 1));
                let _ = ledger.transfer(from, to, rng.below(400));
            }
        }
        assert_eq!(ledger.total_supply(), supply);
        assert_eq!(ledger.circulating(), supply);
    }
    ledger
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn token_supply_is_conserved(seed in any::<u64>(), ops in 1usize..30) {
        let ledger = run_sequence(seed, ops);
        prop_assert_eq!(ledger.circulating(), ledger.total_supply());
    }

    #[test]
    fn collinear_aggregate_is_no_worse_than_weakest_contributor(
        angles in prop::collection::vec(-1.5f64..1.5, 1..12),
    ) {
        let truth = [1.0, 0.0];
        let mut results: Vec<SemanticResult> = angles
            .iter()
            .enumerate()
            .map(|(i, a)| SemanticResult {
                verifier_id: NodeId(i as u64),
                content_id: ContentId(0),
                vector: vec![a.cos(), a.sin()],
                accuracy: None,
            })
            .collect();
        let Ok(report) = offchain_aggregate(&mut results, &truth, 0.0) else {
            return Ok(());
        };
        let weakest = results
            .iter()
            .filter(|r| report.contributors.contains(&r.verifier_id))
            .map(|r| r.accuracy.unwrap())
            .fold(f64::INFINITY, f64::min);
        let agg = report.aggregated[0];
        prop_assert!(agg >= weakest - 1e-9, "aggregate {agg} < weakest {weakest}");
    }
}

#[test]
fn contributor_filter_matches_brute_force() {
    let mut rng = Rng::new(77);
    for trial in 0..1000 {
        let truth = random_unit(8, &mut rng);
        let threshold = rng.uniform_range(0.5, 0.95);
        let count = 1 + rng.below(12) as usize;
        let mut results: Vec<SemanticResult> = (0..count)
            .map(|i| {
                let spread = rng.uniform_range(0.0, 1.0);
                let v: Vec<f64> = truth.iter().map(|t| t + spread * rng.gaussian()).collect();
                SemanticResult {
                    verifier_id: NodeId(i as u64),
                    content_id: ContentId(trial),
                    vector: v,
                    accuracy: None,
                }
            })
            .collect();
        let expected: BTreeSet<NodeId> = results
            .iter()
            .filter(|r| {
                let d: f64 = r.vector.iter().zip(&truth).map(|(a, b)| a * b).sum();
                let na = r.vector.iter().map(|a| a * a).sum::<f64>().sqrt();
                d / na >= threshold
            })
            .map(|r| r.verifier_id)
            .collect();
        match offchain_aggregate(&mut results, &truth, threshold) {
            Ok(report) => {
                assert_eq!(report.contributors, expected, "trial {trial}");
                for r in &results {
                    if report.contributors.contains(&r.verifier_id) {
                        assert!(r.accuracy.unwrap() >= report.threshold_used);
                    }
                }
            }
            Err(Error::AggregationFailure { .. }) => assert!(expected.is_empty(), "trial {trial}"),
            Err(e) => panic!("unexpected {e}"),
        }
    }
}

#[test]
fn aggregate_accuracy_distribution() {
    // Reported, not asserted: how often the aggregate itself clears the bar.
    let mut rng = Rng::new(5);
    let (mut above, mut total) = (0usize, 0usize);
    for i in 0..2000 {
        let content = Content::random(ContentId(i), 8, 0, 0, &mut rng);
        let mut results: Vec<SemanticResult> = (0..7)
            .map(|id| {
                let spread = rng.uniform_range(0.0, 1.0);
                let v =
                    VerifierNode::near(NodeId(id), content.truth(), spread, 0, &mut rng).unwrap();
                simulate_verification(&v, &content, 0.5, &mut rng).unwrap()
            })
            .collect();
        if let Ok(report) = offchain_aggregate(&mut results, content.truth(), 0.8) {
            total += 1;
            let acc = semshard_core::vector::cosine(&report.aggregated, content.truth()).unwrap();
            above += usize::from(acc >= 0.8);
        }
    }
    eprintln!("aggregate accuracy >= threshold in {above}/{total} successful aggregations");
    assert!(total > 0);
}

#[test]
fn commitment_has_no_false_accepts() {
    let mut rng = Rng::new(123);
    let mut false_accepts = 0;
    for _ in 0..10_000 {
        let v = random_unit(8, &mut rng);
        let salt = rng.next_u128();
        let c = commit(&v, salt);
        assert!(verify_commitment(&c, &v, salt));
        let mut w = v.clone();
        let mut s = salt;
        match rng.below(3) {
            0 => {
                let i = rng.below(8) as usize;
                w[i] = f64::from_bits(w[i].to_bits() ^ 1);
            }
            1 => s ^= 1u128 << rng.below(128),
            _ => {
                let i = rng.below(8) as usize;
                w[i] += rng.gaussian();
            }
        }
        if verify_commitment(&c, &w, s) {
            false_accepts += 1;
        }
    }
    assert_eq!(false_accepts, 0);
}
