//! Greedy-matching similarity over per-token embeddings (BERTScore without IDF
//! weighting or baseline rescaling), plus the providers that produce the
//! embeddings.

pub mod provider;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use provider::{
    deterministic_embeddings, deterministic_vector, fetch_embeddings_http, load_embeddings_file, save_embeddings_file, EmbeddingFile,
    EmbeddingProvider, ProviderSpec, DEFAULT_HTTP_TIMEOUT,
};

/// Vectors with a smaller L2 norm are rejected.
pub const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding matrix has no rows")]
    EmptyMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}{}", row.map(|r| format!(" in row {r}")).unwrap_or_default())]
    DimensionMismatch { expected: usize, found: usize, row: Option<usize> },
    #[error("row {row} has norm below {MIN_NORM:e} (or is not finite)")]
    ZeroVector { row: usize },
    #[error("expected {expected} embedding rows, got {found}")]
    TokenCountMismatch { expected: usize, found: usize },
    #[error("token {index} differs: expected {expected:?}, file has {found:?}")]
    TokenMismatch { index: usize, expected: String, found: String },
    #[error("{path}: parse error at line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("request to {endpoint} timed out after {timeout_ms} ms")]
    Timeout { endpoint: String, timeout_ms: u64 },
    #[error("cannot reach {endpoint}: {message}")]
    Unreachable { endpoint: String, message: String },
    #[error("protocol error from {endpoint}: {message}")]
    Protocol { endpoint: String, message: String },
    #[error("invalid provider spec {0:?}; expected file:PATH, http:URL or det:SEED,DIM")]
    InvalidSpec(String),
}

/// One vector per token, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    dimension: usize,
}

impl EmbeddingMatrix {
    /// Validates shape and rejects near-zero or non-finite rows.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, EmbedError> {
        let dimension = rows.first().map(Vec::len).ok_or(EmbedError::EmptyMatrix)?;
        if dimension == 0 {
            return Err(EmbedError::DimensionMismatch { expected: 1, found: 0, row: Some(0) });
        }
        let mut data = Vec::with_capacity(rows.len() * dimension);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dimension {
                return Err(EmbedError::DimensionMismatch { expected: dimension, found: row.len(), row: Some(i) });
            }
            data.extend(row);
        }
        Self::from_flat(data, dimension)
    }

    /// Row-major construction.
    pub fn from_flat(data: Vec<f64>, dimension: usize) -> Result<Self, EmbedError> {
        if dimension == 0 || !data.len().is_multiple_of(dimension) {
            return Err(EmbedError::DimensionMismatch { expected: dimension.max(1), found: data.len(), row: None });
        }
        if data.is_empty() {
            return Err(EmbedError::EmptyMatrix);
        }
        let m = EmbeddingMatrix { data, dimension };
        for (i, row) in m.rows().enumerate() {
            let norm = l2(row);
            if !(norm.is_finite() && norm >= MIN_NORM) {
                return Err(EmbedError::ZeroVector { row: i });
            }
        }
        Ok(m)
    }

    pub fn token_count(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dimension)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Copy with every row scaled to unit length.
    pub fn normalized(&self) -> EmbeddingMatrix {
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.dimension) {
            let norm = l2(row);
            row.iter_mut().for_each(|x| *x /= norm);
        }
        EmbeddingMatrix { data, dimension: self.dimension }
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BertScore {
    fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        BertScore { precision, recall, f1 }
    }
}

/// Greedy cosine matching. Precision averages, over hypothesis tokens, the best
/// cosine against any reference token; recall does the same from the reference
/// side.
pub fn greedy_match_score(hypothesis: &EmbeddingMatrix, reference: &EmbeddingMatrix) -> Result<BertScore, EmbedError> {
    if hypothesis.dimension != reference.dimension {
        return Err(EmbedError::DimensionMismatch { expected: reference.dimension, found: hypothesis.dimension, row: None });
    }
    let hyp = hypothesis.normalized();
    let refs = reference.normalized();
    let (h, r) = (hyp.token_count(), refs.token_count());

    // similarity[i * r + j] = cos(hyp_i, ref_j)
    let sim: Vec<f64> = hyp.rows().flat_map(|a| refs.rows().map(move |b| dot(a, b))).collect();
    let precision = (0..h).map(|i| sim[i * r..(i + 1) * r].iter().copied().fold(f64::NEG_INFINITY, f64::max)).sum::<f64>() / h as f64;
    let recall = (0..r).map(|j| (0..h).map(|i| sim[i * r + j]).fold(f64::NEG_INFINITY, f64::max)).sum::<f64>() / r as f64;
    Ok(BertScore::from_pr(precision, recall))
}
