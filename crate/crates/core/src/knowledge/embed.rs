//! Deterministic hashed bag-of-words embeddings.

/// Embedding dimension used throughout the knowledge graph.
pub const EMBEDDING_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const BUCKET_SEED: u64 = 0;
const SIGN_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Text-to-vector function used for retrieval. Implementations must be
/// deterministic and return vectors of length [`EMBEDDING_DIM`].
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Lowercase, split on non-alphanumerics, hash each token to a signed bucket,
/// accumulate and L2-normalize.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashedBagOfWords;

impl Embedder for HashedBagOfWords {
    fn embed(&self, text: &str) -> Vec<f64> {
        embed(text)
    }
}

pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

pub fn embed(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; EMBEDDING_DIM];
    for tok in tokens(text) {
        let bytes = tok.as_bytes();
        let bucket = (fnv1a(BUCKET_SEED, bytes) % EMBEDDING_DIM as u64) as usize;
        let sign = if fnv1a(SIGN_SEED, bytes) & 1 == 0 { 1.0 } else { -1.0 };
        v[bucket] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
