use super::ledger::Ledger;
use super::verification::SemanticResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Solver,
    Challenger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChallengeOutcome {
    pub winner: Party,
    pub bond_transfer: u64,
}

/// Settle a challenge against a solver's posted result.
///
/// The challenger wins when its accuracy matches or beats the solver's; the
/// loser's bond moves to the winner.
pub fn interactive_challenge(
    solver: &SemanticResult,
    challenger: &SemanticResult,
    bond: u64,
    ledger: &mut Ledger,
) -> Result<ChallengeOutcome> {
    let solver_acc = solver.accuracy.ok_or(Error::Unscored(solver.verifier_id))?;
    let challenger_acc = challenger
        .accuracy
        .ok_or(Error::Unscored(challenger.verifier_id))?;
    ledger.ensure_funds(solver.verifier_id, bond)?;
    ledger.ensure_funds(challenger.verifier_id, bond)?;

    let (winner, from, to) = if challenger_acc >= solver_acc {
        (
            Party::Challenger,
            solver.verifier_id,
            challenger.verifier_id,
        )
    } else {
        (Party::Solver, challenger.verifier_id, solver.verifier_id)
    };
    ledger.transfer(from, to, bond)?;
    Ok(ChallengeOutcome {
        winner,
        bond_transfer: bond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContentId, NodeId};

    fn scored(id: u64, acc: Option<f64>) -> SemanticResult {
        SemanticResult {
            verifier_id: NodeId(id),
            content_id: ContentId(0),
            vector: vec![1.0],
            accuracy: acc,
        }
    }

    fn funded() -> Ledger {
        let mut l = Ledger::new();
        l.mint(NodeId(1), 100);
        l.mint(NodeId(2), 100);
        l
    }

    #[test]
    fn decision_rule() {
        let mut l = funded();
        let out = interactive_challenge(&scored(1, Some(0.7)), &scored(2, Some(0.9)), 10, &mut l)
            .unwrap();
        assert_eq!(out.winner, Party::Challenger);
        assert_eq!((l.balance(NodeId(1)), l.balance(NodeId(2))), (90, 110));

        let out = interactive_challenge(&scored(1, Some(0.8)), &scored(2, Some(0.8)), 10, &mut l)
            .unwrap();
        assert_eq!(out.winner, Party::Challenger);

        let out = interactive_challenge(&scored(1, Some(0.9)), &scored(2, Some(0.5)), 10, &mut l)
            .unwrap();
        assert_eq!(
            out,
            ChallengeOutcome {
                winner: Party::Solver,
                bond_transfer: 10
            }
        );
        assert_eq!((l.balance(NodeId(1)), l.balance(NodeId(2))), (90, 110));
        assert_eq!(l.circulating(), 200);
    }

    #[test]
    fn unscored_and_unbonded() {
        let mut l = funded();
        let err =
            interactive_challenge(&scored(1, None), &scored(2, Some(0.9)), 10, &mut l).unwrap_err();
        assert_eq!(err, Error::Unscored(NodeId(1)));
        let err = interactive_challenge(&scored(1, Some(0.1)), &scored(3, Some(0.9)), 10, &mut l)
            .unwrap_err();
        assert!(matches!(err, Error::InsufficientFunds { .. }));
        assert_eq!(l, funded());
    }
}
