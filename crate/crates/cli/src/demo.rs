//! `pos-demo`: one content item verified by `n` simulated verifiers under a
//! chosen mechanism, with the final ledger printed and token conservation
//! checked.
//!
//! Accounts: the producer is node 0, verifiers are nodes `1..=n`. Every
//! verifier starts with `VERIFIER_FUNDS`; the producer holds the reward pool.

use std::fmt::Write as _;

use clap::ValueEnum;

use semshard_core::pos::{
    distribute_rewards, interactive_challenge, offchain_aggregate, score_accuracy, select_leader,
    simulate_verification, CommitmentScheme, Ledger, ProofScheme, SemanticResult,
};
use semshard_core::{Content, ContentId, NetworkConfig, NodeId, Rng, VerifierNode};

use crate::error::{CliError, Result};

pub const PRODUCER: NodeId = NodeId(0);
pub const REWARD_POOL: u64 = 1000;
pub const BOND: u64 = 100;
pub const VERIFIER_FUNDS: u64 = 500;
/// Noise scale of verifier knowledge around the content's truth.
pub const KNOWLEDGE_SPREAD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mechanism {
    Offchain,
    Interactive,
    Commitment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoArgs {
    pub verifiers: usize,
    pub mechanism: Mechanism,
    pub seed: u64,
    /// Alter the revealed vector after committing (commitment only).
    pub tamper: bool,
    /// Give the challenger the content's exact truth (interactive only).
    pub challenger_knows_truth: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    pub text: String,
    pub ledger: Ledger,
}

fn check_conservation(ledger: &Ledger, supply: u64) -> Result<()> {
    if ledger.circulating() != supply || ledger.total_supply() != supply {
        return Err(CliError::Verification(format!(
            "token conservation violated: {} circulating, {} supply, {supply} minted",
            ledger.circulating(),
            ledger.total_supply()
        )));
    }
    Ok(())
}

/// Runs the demo. On a failed commitment check the error carries the full
/// report text so the caller can still print it.
pub fn run_demo(args: &DemoArgs, cfg: &NetworkConfig) -> Result<DemoReport> {
    if args.verifiers == 0 {
        return Err(CliError::Usage("--verifiers must be at least 1".into()));
    }
    if args.mechanism == Mechanism::Interactive && args.verifiers < 2 {
        return Err(CliError::Usage(
            "interactive mechanism needs at least 2 verifiers".into(),
        ));
    }

    let mut rng = Rng::new(args.seed);
    let content = Content::random(ContentId(1), cfg.semantic_dim, REWARD_POOL, BOND, &mut rng);
    let truth = content.truth().to_vec();

    let mut ledger = Ledger::new();
    ledger.mint(PRODUCER, REWARD_POOL);
    let mut verifiers = Vec::with_capacity(args.verifiers);
    for i in 1..=args.verifiers as u64 {
        let v = VerifierNode::near(
            NodeId(i),
            &truth,
            KNOWLEDGE_SPREAD,
            VERIFIER_FUNDS,
            &mut rng,
        )?;
        ledger.mint(v.id, v.balance);
        verifiers.push(v);
    }
    let supply = ledger.total_supply();

    let ids: Vec<NodeId> = verifiers.iter().map(|v| v.id).collect();
    let leader = select_leader(&ids, args.seed)?;
    let mut text = String::new();
    writeln!(text, "mechanism {:?}", args.mechanism).unwrap();
    writeln!(text, "verifiers {}", args.verifiers).unwrap();
    writeln!(text, "leader {leader}").unwrap();

    let mut verdict = Ok(());
    match args.mechanism {
        Mechanism::Offchain => {
            let mut results = verifiers
                .iter()
                .map(|v| simulate_verification(v, &content, cfg.noise_sigma, &mut rng))
                .collect::<semshard_core::Result<Vec<_>>>()?;
            let report = offchain_aggregate(&mut results, &truth, cfg.accuracy_threshold)?;
            for r in &results {
                writeln!(
                    text,
                    "accuracy {} {:.6}",
                    r.verifier_id,
                    r.accuracy.unwrap_or(0.0)
                )
                .unwrap();
            }
            let contributors: Vec<String> =
                report.contributors.iter().map(|c| c.to_string()).collect();
            writeln!(text, "threshold {}", report.threshold_used).unwrap();
            writeln!(text, "contributors {}", contributors.join(" ")).unwrap();
            let split = distribute_rewards(&report, PRODUCER, content.reward_pool, &mut ledger)?;
            writeln!(text, "reward_per_contributor {}", split.per_contributor).unwrap();
            writeln!(text, "reward_remainder {}", split.remainder).unwrap();
        }
        Mechanism::Interactive => {
            let solver_node = verifiers
                .iter()
                .find(|v| v.id == leader)
                .expect("leader is a verifier");
            let challenger_id = select_leader(&ids, args.seed + 1)?;
            let mut challenger_node = verifiers
                .iter()
                .find(|v| v.id == challenger_id)
                .expect("challenger is a verifier")
                .clone();
            if args.challenger_knows_truth {
                challenger_node =
                    VerifierNode::new(challenger_id, &truth, challenger_node.balance)?;
            }
            let mut solver =
                simulate_verification(solver_node, &content, cfg.noise_sigma, &mut rng)?;
            let mut challenger =
                simulate_verification(&challenger_node, &content, cfg.noise_sigma, &mut rng)?;
            score(&mut solver, &truth, &mut text)?;
            score(&mut challenger, &truth, &mut text)?;
            let outcome = interactive_challenge(&solver, &challenger, content.bond, &mut ledger)?;
            writeln!(
                text,
                "solver {} challenger {}",
                solver.verifier_id, challenger.verifier_id
            )
            .unwrap();
            writeln!(text, "winner {:?}", outcome.winner).unwrap();
            writeln!(text, "bond_transfer {}", outcome.bond_transfer).unwrap();
        }
        Mechanism::Commitment => {
            let node = verifiers
                .iter()
                .find(|v| v.id == leader)
                .expect("leader is a verifier");
            let mut result = simulate_verification(node, &content, cfg.noise_sigma, &mut rng)?;
            score(&mut result, &truth, &mut text)?;
            let scheme = CommitmentScheme;
            let proof = scheme.prove(&result.vector, &mut rng);
            writeln!(text, "commitment {}", hex::encode(proof.digest)).unwrap();
            let mut revealed = result.vector.clone();
            if args.tamper {
                revealed[0] = f64::from_bits(revealed[0].to_bits() ^ 1);
                writeln!(text, "tampered reveal").unwrap();
            }
            if scheme.verify(&proof, &revealed) {
                writeln!(text, "commitment verified").unwrap();
                ledger.transfer(PRODUCER, leader, content.reward_pool)?;
                writeln!(text, "reward {} -> {}", content.reward_pool, leader).unwrap();
            } else {
                writeln!(text, "commitment REJECTED").unwrap();
                verdict = Err(());
            }
        }
    }

    check_conservation(&ledger, supply)?;
    text.push_str("ledger\n");
    text.push_str(&ledger.dump());
    match verdict {
        Ok(()) => Ok(DemoReport { text, ledger }),
        Err(()) => Err(CliError::Verification(format!(
            "revealed vector does not open the commitment\n{text}"
        ))),
    }
}

fn score(result: &mut SemanticResult, truth: &[f64], text: &mut String) -> Result<()> {
    let acc = score_accuracy(result, truth)?;
    writeln!(text, "accuracy {} {acc:.6}", result.verifier_id).unwrap();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(mechanism: Mechanism) -> DemoArgs {
        DemoArgs {
            verifiers: 5,
            mechanism,
            seed: 1,
            tamper: false,
            challenger_knows_truth: false,
        }
    }

    #[test]
    fn offchain_conserves() {
        let r = run_demo(&args(Mechanism::Offchain), &NetworkConfig::default()).unwrap();
        assert_eq!(r.ledger.circulating(), REWARD_POOL + 5 * VERIFIER_FUNDS);
        assert!(r.text.contains("contributors"));
    }

    #[test]
    fn informed_challenger_wins() {
        let mut a = args(Mechanism::Interactive);
        a.challenger_knows_truth = true;
        for seed in 0..20 {
            a.seed = seed;
            let r = run_demo(&a, &NetworkConfig::default()).unwrap();
            assert!(r.text.contains("winner Challenger"), "{}", r.text);
        }
    }

    #[test]
    fn tampered_commitment_fails() {
        let mut a = args(Mechanism::Commitment);
        assert!(run_demo(&a, &NetworkConfig::default()).is_ok());
        a.tamper = true;
        let err = run_demo(&a, &NetworkConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn interactive_needs_two() {
        let mut a = args(Mechanism::Interactive);
        a.verifiers = 1;
        assert_eq!(
            run_demo(&a, &NetworkConfig::default())
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
