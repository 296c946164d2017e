//! Embeddings and approximate nearest-neighbour search.

mod embed;
mod hnsw;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embed::{embedding_text, Embedder, MockEmbedder, DEFAULT_MOCK_DIMENSION};
pub use hnsw::{HnswConfig, HnswIndex, INDEX_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("text is empty")]
    EmptyText,
    #[error("embedding backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector has non-finite or all-zero entries")]
    InvalidVector,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("index is empty")]
    EmptyIndex,
    #[error("index is not frozen; searches are only allowed after freeze")]
    NotFrozen,
    #[error("index is frozen; inserts are rejected")]
    Frozen,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index format version {found}, expected {expected}")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Unit-norm embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// L2-normalizes `values`. Rejects empty, non-finite and zero vectors.
    pub fn normalized(mut values: Vec<f32>) -> Result<Self, VectorError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(VectorError::InvalidVector);
        }
        let norm = values.iter().map(|v| f64::from(*v) * f64::from(*v)).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(VectorError::InvalidVector);
        }
        for v in &mut values {
            *v = (f64::from(*v) / norm) as f32;
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| f64::from(*v) * f64::from(*v)).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f32>> for EmbeddingVector {
    type Error = VectorError;

    fn try_from(values: Vec<f32>) -> Result<Self, Self::Error> {
        Self::normalized(values)
    }
}

impl From<EmbeddingVector> for Vec<f32> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

#[inline]
pub(crate) fn distance(a: &[f32], b: &[f32]) -> f32 {
    let dot: f32 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (1.0 - dot).clamp(0.0, 2.0)
}

/// `1 − a·b` for unit vectors, in `[0, 2]`.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f32, VectorError> {
    if a.dimension() != b.dimension() {
        return Err(VectorError::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
    Ok(distance(a.values(), b.values()))
}

/// Exact k-nearest neighbours by linear scan, sorted by distance then id.
pub fn brute_force_knn<'a, I>(items: I, query: &EmbeddingVector, k: usize) -> Vec<(String, f32)>
where
    I: IntoIterator<Item = (&'a str, &'a EmbeddingVector)>,
{
    let mut scored: Vec<(String, f32)> = items
        .into_iter()
        .map(|(id, v)| (id.to_string(), distance(v.values(), query.values())))
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(values: &[f32]) -> EmbeddingVector {
        EmbeddingVector::normalized(values.to_vec()).unwrap()
    }

    #[test]
    fn cosine_cases() {
        let a = v(&[1.0, 2.0, 3.0]);
        assert!(cosine_distance(&a, &a).unwrap().abs() < 1e-6);
        let x = v(&[1.0, 0.0]);
        let y = v(&[0.0, 1.0]);
        assert!((cosine_distance(&x, &y).unwrap() - 1.0).abs() < 1e-6);
        let neg = v(&[-1.0, -2.0, -3.0]);
        assert!((cosine_distance(&a, &neg).unwrap() - 2.0).abs() < 1e-6);
        assert!(matches!(
            cosine_distance(&a, &x),
            Err(VectorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn normalization_contract() {
        assert!((v(&[3.0, 4.0]).norm() - 1.0).abs() < 1e-6);
        assert!(EmbeddingVector::normalized(vec![0.0, 0.0]).is_err());
        assert!(EmbeddingVector::normalized(vec![f32::NAN]).is_err());
        assert!(EmbeddingVector::normalized(vec![]).is_err());
    }

    #[test]
    fn brute_force_cases() {
        let items = [("a".to_string(), v(&[1.0, 0.0])), ("b".to_string(), v(&[0.0, 1.0]))];
        let q = v(&[1.0, 0.1]);
        let single = brute_force_knn(items.iter().take(1).map(|(i, v)| (i.as_str(), v)), &q, 3);
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].0, "a");
        let both = brute_force_knn(items.iter().map(|(i, v)| (i.as_str(), v)), &q, 5);
        assert_eq!(both.iter().map(|r| r.0.as_str()).collect::<Vec<_>>(), vec!["a", "b"]);
        let none: Vec<(&str, &EmbeddingVector)> = Vec::new();
        assert!(brute_force_knn(none, &q, 3).is_empty());
    }
}
