//! Static word vectors, mean pooling and cosine similarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::text;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Token -> vector table with one fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    rows: BTreeMap<String, usize>,
    data: Vec<f32>,
}

impl VectorStore {
    pub const DEFAULT_DIM: usize = 300;

    pub fn new(dim: usize) -> Self {
        VectorStore { dim, rows: BTreeMap::new(), data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds a vector under the case-folded token. Duplicates keep the first
    /// vector and return `Ok(false)`.
    pub fn insert(&mut self, token: &str, values: &[f32]) -> Result<bool, EmbeddingError> {
        if values.len() != self.dim {
            return Err(EmbeddingError::Dimension { expected: self.dim, got: values.len() });
        }
        let token: String = token.chars().flat_map(char::to_lowercase).collect();
        if self.rows.contains_key(&token) {
            return Ok(false);
        }
        self.rows.insert(token, self.data.len() / self.dim.max(1));
        self.data.extend_from_slice(values);
        Ok(true)
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.rows.get(token).map(|&r| &self.data[r * self.dim..(r + 1) * self.dim])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.rows.contains_key(token)
    }
}

/// Mean of the token vectors of a text.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledEmbedding {
    pub vector: Vec<f64>,
    pub token_count: usize,
    pub oov_count: usize,
}

/// Averages word vectors over every token of `text`. Out-of-vocabulary tokens
/// contribute zero vectors but still count in the denominator.
pub fn embed_mean(text: &str, store: &VectorStore) -> PooledEmbedding {
    let mut vector = vec![0.0f64; store.dim()];
    let mut token_count = 0;
    let mut oov_count = 0;
    for tok in text::tokenize(text) {
        token_count += 1;
        match store.get(&tok.text) {
            Some(v) => vector.iter_mut().zip(v).for_each(|(acc, &x)| *acc += f64::from(x)),
            None => oov_count += 1,
        }
    }
    if token_count > 0 {
        let n = token_count as f64;
        vector.iter_mut().for_each(|x| *x /= n);
    }
    PooledEmbedding { vector, token_count, oov_count }
}

/// Cosine similarity in `[-1, 1]`; zero when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::Dimension { expected: u.len(), got: v.len() });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (libm::sqrt(nu) * libm::sqrt(nv))).clamp(-1.0, 1.0))
}

/// In-vocabulary and total token counts over a set of texts.
pub fn coverage<'a, I>(texts: I, store: &VectorStore) -> (usize, usize)
where
    I: IntoIterator<Item = &'a str>,
{
    texts.into_iter().flat_map(text::tokenize).fold((0, 0), |(hit, all), t| (hit + usize::from(store.contains(&t.text)), all + 1))
}

/// Precomputed sentence vectors keyed by whitespace-normalized text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentenceVectors {
    dim: Option<usize>,
    table: BTreeMap<String, Vec<f64>>,
}

impl SentenceVectors {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// All vectors must share the dimension of the first one inserted.
    pub fn insert(&mut self, text: &str, values: Vec<f64>) -> Result<(), EmbeddingError> {
        match self.dim {
            Some(d) if d != values.len() => return Err(EmbeddingError::Dimension { expected: d, got: values.len() }),
            None => self.dim = Some(values.len()),
            _ => {}
        }
        self.table.entry(text::normalize_whitespace(text)).or_insert(values);
        Ok(())
    }

    pub fn get(&self, text: &str) -> Option<&[f64]> {
        self.table.get(&text::normalize_whitespace(text)).map(Vec::as_slice)
    }
}
