use crate::error::{Error, Result};
use crate::model::{Content, ContentId, NodeId, VerifierNode};
use crate::rng::Rng;
use crate::vector;

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticResult {
    pub verifier_id: NodeId,
    pub content_id: ContentId,
    pub vector: Vec<f64>,
    /// Set by the leader when it scores the result against shared knowledge.
    pub accuracy: Option<f64>,
}

/// A verifier's reading of `content`.
///
/// The noise scale shrinks with the verifier's alignment to the content:
/// `normalize(truth + (1 − align)·ε)` with `align = max(0, cos(knowledge, truth))`
/// and `ε ~ N(0, sigma² I)`. The noise vector is always drawn so the stream
/// advances by the same amount regardless of alignment.
pub fn simulate_verification(
    verifier: &VerifierNode,
    content: &Content,
    sigma: f64,
    rng: &mut Rng,
) -> Result<SemanticResult> {
    let truth = content.truth();
    let align = vector::cosine(verifier.knowledge(), truth)?.max(0.0);
    let noise: Vec<f64> = (0..truth.len()).map(|_| sigma * rng.gaussian()).collect();
    let coeff = 1.0 - align;
    let vector = if coeff == 0.0 {
        truth.to_vec()
    } else {
        let perturbed: Vec<f64> = truth
            .iter()
            .zip(&noise)
            .map(|(t, e)| t + coeff * e)
            .collect();
        vector::normalize(&perturbed)?
    };
    Ok(SemanticResult {
        verifier_id: verifier.id,
        content_id: content.id,
        vector,
        accuracy: None,
    })
}

/// Clipped cosine similarity against `truth`, recorded on the result.
pub fn score_accuracy(result: &mut SemanticResult, truth: &[f64]) -> Result<f64> {
    let acc = vector::cosine(&result.vector, truth)?.max(0.0);
    result.accuracy = Some(acc);
    Ok(acc)
}

/// Sorted round-robin: `sorted(ids)[round mod |ids|]`.
pub fn select_leader(ids: &[NodeId], round: u64) -> Result<NodeId> {
    if ids.is_empty() {
        return Err(Error::NoVerifiers);
    }
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted[(round % sorted.len() as u64) as usize])
}
