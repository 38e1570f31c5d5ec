//! Small dense-vector helpers for semantic and knowledge vectors.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Default dimension of knowledge and semantic vectors.
pub const DEFAULT_DIM: usize = 8;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// Cosine similarity. Identical inputs give exactly 1.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let aa = dot(a, a);
    let bb = dot(b, b);
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::Degenerate("zero vector has no direction"));
    }
    Ok((dot(a, b) / (aa * bb).sqrt()).clamp(-1.0, 1.0))
}

pub fn normalize(a: &[f64]) -> Result<Vec<f64>> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Degenerate(
            "cannot normalize a zero or non-finite vector",
        ));
    }
    Ok(a.iter().map(|x| x / n).collect())
}

pub fn is_unit(a: &[f64]) -> bool {
    (norm(a) - 1.0).abs() <= 1e-9
}

/// Uniformly distributed direction on the unit sphere.
pub fn random_unit(dim: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
        if let Ok(u) = normalize(&v) {
            return u;
        }
    }
}
