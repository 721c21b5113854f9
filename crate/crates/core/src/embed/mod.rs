//! Tokenization, chunking, embeddings and an exact cosine-similarity index
//! over graph text and documents.

mod index;
mod store;

use serde::{Deserialize, Serialize};

pub use store::RawRecord;
pub use index::{Chunk, ChunkSource, EmbeddingIndex, Hit, IndexConfig, IndexSources, SectionWeights};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("chunk size must be at least 1")]
    ChunkSize,
    #[error("embedding dimension must be at least 8, got {0}")]
    Dimension(usize),
    #[error("dimension mismatch: index has {expected}, vector has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("top_n must be at least 1")]
    TopN,
    #[error("document {0} has no chunks in the index")]
    DocumentNotIndexed(String),
    #[error("section weights must be non-negative and sum to 1, got {0:?}")]
    Weights([f64; 4]),
    #[error("embedding backend: {0}")]
    Backend(String),
    #[error("index file: {0}")]
    Format(String),
    #[error("index does not match its sources: {0}")]
    Stale(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Whitespace split, then leading and trailing punctuation of each word
/// become tokens of their own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let mut lo = 0;
        while lo < chars.len() && !chars[lo].is_alphanumeric() {
            out.push(chars[lo].to_string());
            lo += 1;
        }
        let mut hi = chars.len();
        while hi > lo && !chars[hi - 1].is_alphanumeric() {
            hi -= 1;
        }
        if hi > lo {
            out.push(chars[lo..hi].iter().collect());
        }
        out.extend(chars[hi..].iter().map(char::to_string));
    }
    out
}

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Non-overlapping windows of `size` tokens; only the last may be shorter.
pub fn chunk(token_count: usize, size: usize) -> Result<Vec<TokenSpan>, EmbedError> {
    if size < 1 {
        return Err(EmbedError::ChunkSize);
    }
    Ok((0..token_count)
        .step_by(size)
        .map(|start| TokenSpan { start, end: (start + size).min(token_count) })
        .collect())
}

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;
}

/// Deterministic hashed bag-of-tokens embedder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceEmbedder {
    d: usize,
}

pub const DEFAULT_DIM: usize = 256;

impl ReferenceEmbedder {
    pub fn new(d: usize) -> Result<Self, EmbedError> {
        if d < 8 {
            return Err(EmbedError::Dimension(d));
        }
        Ok(Self { d })
    }
}

impl Default for ReferenceEmbedder {
    fn default() -> Self {
        Self { d: DEFAULT_DIM }
    }
}

impl Embedder for ReferenceEmbedder {
    fn dim(&self) -> usize {
        self.d
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        Ok(embed_reference(text, self.d))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn sign_bit(h: u64) -> u64 {
    let m = (h ^ (h >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    (m ^ (m >> 33)) >> 63
}

/// Lowercased tokens hash to a bucket and a sign; the sum is L2-normalized.
/// Empty input gives the zero vector. If the signed terms cancel exactly,
/// unsigned counts are used instead so that non-empty input stays unit
/// length.
pub fn embed_reference(text: &str, d: usize) -> Vec<f64> {
    assert!(d >= 8, "embedding dimension must be at least 8");
    let hashes: Vec<u64> = tokenize(text).iter().map(|t| fnv1a(t.to_lowercase().as_bytes())).collect();
    let mut v = vec![0.0; d];
    for h in &hashes {
        let sign = if sign_bit(*h) == 0 { 1.0 } else { -1.0 };
        v[(h % d as u64) as usize] += sign;
    }
    if !hashes.is_empty() && v.iter().all(|x| *x == 0.0) {
        for h in &hashes {
            v[(h % d as u64) as usize] += 1.0;
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb).sqrt()
    }
}
