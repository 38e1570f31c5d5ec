//! Non-interactive verification through a binding hash commitment.
//!
//! Canonical encoding of a vector: its length as a little-endian `u64`, then
//! each component as a little-endian IEEE-754 `f64`. The digest is
//! `SHA-256(encoding ‖ salt)` with the salt as a little-endian `u128`.

use sha2::{Digest, Sha256};

use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commitment {
    pub digest: [u8; 32],
    pub salt: u128,
}

pub fn encode_vector(vector: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * vector.len());
    out.extend_from_slice(&(vector.len() as u64).to_le_bytes());
    for x in vector {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn digest(vector: &[f64], salt: u128) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(encode_vector(vector));
    h.update(salt.to_le_bytes());
    h.finalize().into()
}

pub fn commit(vector: &[f64], salt: u128) -> Commitment {
    Commitment {
        digest: digest(vector, salt),
        salt,
    }
}

/// True iff `vector` and `salt` reproduce the committed digest.
pub fn verify_commitment(c: &Commitment, vector: &[f64], salt: u128) -> bool {
    digest(vector, salt) == c.digest
}

/// A proof system for semantic verification results that a contract can
/// check without a challenge game.
pub trait ProofScheme {
    type Proof;

    fn prove(&self, vector: &[f64], rng: &mut Rng) -> Self::Proof;

    fn verify(&self, proof: &Self::Proof, vector: &[f64]) -> bool;
}

/// Default proof scheme: a salted SHA-256 commitment opened by revealing the
/// vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct CommitmentScheme;

impl ProofScheme for CommitmentScheme {
    type Proof = Commitment;

    fn prove(&self, vector: &[f64], rng: &mut Rng) -> Commitment {
        commit(vector, rng.next_u128())
    }

    fn verify(&self, proof: &Commitment, vector: &[f64]) -> bool {
        verify_commitment(proof, vector, proof.salt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_verify_examples() {
        let v = [0.25, -0.5, 0.125];
        let salt = 0x0123_4567_89ab_cdef_0011_2233_4455_6677;
        let c = commit(&v, salt);
        assert!(verify_commitment(&c, &v, salt));

        let mut bumped = v;
        bumped[1] = f64::from_bits(bumped[1].to_bits() + 1);
        assert!(!verify_commitment(&c, &bumped, salt));
        assert!(!verify_commitment(&c, &v, salt ^ 1));
        assert!(!verify_commitment(&c, &v[..2], salt));
    }

    #[test]
    fn encoding_layout() {
        let bytes = encode_vector(&[1.0]);
        assert_eq!(&bytes[..8], &1u64.to_le_bytes());
        assert_eq!(&bytes[8..], &1.0f64.to_le_bytes());
    }

    #[test]
    fn scheme_round_trip() {
        let mut rng = Rng::new(2);
        let v = [0.6, 0.8];
        let proof = CommitmentScheme.prove(&v, &mut rng);
        assert!(CommitmentScheme.verify(&proof, &v));
        assert!(!CommitmentScheme.verify(&proof, &[0.8, 0.6]));
    }
}
