use super::{EmbeddingVector, VectorError};

pub const DEFAULT_MOCK_DIMENSION: usize = 64;

/// Text-to-vector backend.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, VectorError>;
}

/// Offline embedder: lowercase word unigrams and adjacent-word bigrams,
/// feature-hashed with FNV-1a into `dimension` signed buckets.
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dimension: usize,
}

impl MockEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension }
    }
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_MOCK_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl MockEmbedder {
    fn add(&self, values: &mut [f32], feature: &str, weight: f32) {
        let h = fnv1a(feature.as_bytes());
        let bucket = (h % self.dimension as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        values[bucket] += sign * weight;
    }
}

impl Embedder for MockEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, VectorError> {
        let tokens: Vec<String> = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect();
        if tokens.is_empty() {
            return Err(VectorError::EmptyText);
        }
        let mut values = vec![0.0f32; self.dimension];
        for token in &tokens {
            self.add(&mut values, &format!("u:{token}"), 1.0);
        }
        for pair in tokens.windows(2) {
            self.add(&mut values, &format!("b:{} {}", pair[0], pair[1]), 0.5);
        }
        if values.iter().all(|v| *v == 0.0) {
            // Features cancelled out exactly; fall back to a whole-text bucket.
            self.add(&mut values, &format!("t:{}", tokens.join(" ")), 1.0);
        }
        EmbeddingVector::normalized(values)
    }
}

/// Text used to embed a law: title plus the first `max_chars` characters of the body.
pub fn embedding_text(title: &str, body: &str, max_chars: usize) -> String {
    let body: String = body.chars().take(max_chars).collect();
    if title.is_empty() {
        body
    } else {
        format!("{title}\n{body}")
    }
}
