//! Embedding sources: JSON files, an HTTP service, and a seeded hash provider.
//!
//! # Deterministic vectors
//!
//! The hash provider is a cross-process contract (the reference embedding
//! service reproduces it bit for bit). For a normalized token `t`, seed `s`
//! and dimension `d`:
//!
//! 1. for block `b = 0, 1, ..` compute
//!    `SHA-256("simpeval-det-v1" || s as u64 LE || len(t) as u64 LE || utf8(t) || b as u32 LE)`;
//! 2. read each digest as four little-endian `u64` words `w`, in order, and map
//!    each to `2 * ((w >> 11) * 2^-53) - 1`; the first `d` values form `v`;
//! 3. divide `v` by `sqrt(v_0^2 + v_1^2 + ..)`, summed in index order.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbedError, EmbeddingMatrix, MIN_NORM};
use crate::text::TokenSequence;

const DETERMINISTIC_DOMAIN: &[u8] = b"simpeval-det-v1";
pub const DEFAULT_HTTP_TIMEOUT: Duration = Duration::from_secs(30);

/// Where embeddings come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSpec {
    /// Directory holding one `<key>.json` embedding file per text.
    File(PathBuf),
    Http {
        endpoint: String,
        timeout: Duration,
    },
    Deterministic {
        seed: u64,
        dimension: usize,
    },
}

impl std::str::FromStr for ProviderSpec {
    type Err = EmbedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || EmbedError::InvalidSpec(s.to_owned());
        if s.starts_with("http://") || s.starts_with("https://") {
            return Ok(ProviderSpec::Http { endpoint: s.to_owned(), timeout: DEFAULT_HTTP_TIMEOUT });
        }
        let (kind, rest) = s.split_once(':').ok_or_else(invalid)?;
        match kind {
            "file" if !rest.is_empty() => Ok(ProviderSpec::File(PathBuf::from(rest))),
            "http" if !rest.is_empty() => {
                let endpoint = if rest.contains("://") { rest.to_owned() } else { format!("http://{rest}") };
                Ok(ProviderSpec::Http { endpoint, timeout: DEFAULT_HTTP_TIMEOUT })
            }
            "det" => {
                let (seed, dim) = rest.split_once(',').ok_or_else(invalid)?;
                let seed = seed.trim().parse().map_err(|_| invalid())?;
                let dimension: usize = dim.trim().parse().map_err(|_| invalid())?;
                if dimension == 0 {
                    return Err(invalid());
                }
                Ok(ProviderSpec::Deterministic { seed, dimension })
            }
            _ => Err(invalid()),
        }
    }
}

impl std::fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProviderSpec::File(p) => write!(f, "file:{}", p.display()),
            ProviderSpec::Http { endpoint, .. } => write!(f, "http:{endpoint}"),
            ProviderSpec::Deterministic { seed, dimension } => write!(f, "det:{seed},{dimension}"),
        }
    }
}

/// Produces one embedding row per token. `key` names the text (used by the
/// file provider to locate `<key>.json`).
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, key: &str, tokens: &TokenSequence) -> Result<EmbeddingMatrix, EmbedError>;
}

impl EmbeddingProvider for ProviderSpec {
    fn embed(&self, key: &str, tokens: &TokenSequence) -> Result<EmbeddingMatrix, EmbedError> {
        match self {
            ProviderSpec::File(dir) => load_embeddings_file(dir.join(format!("{key}.json")), tokens),
            ProviderSpec::Http { .. } => fetch_embeddings_http(self, tokens),
            ProviderSpec::Deterministic { seed, dimension } => deterministic_embeddings(*seed, *dimension, tokens),
        }
    }
}

/// On-disk and over-the-wire embedding document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub dimension: usize,
    #[serde(default)]
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

fn check_rows(vectors: &[Vec<f64>], dimension: usize, expected: usize) -> Result<(), EmbedError> {
    if vectors.len() != expected {
        return Err(EmbedError::TokenCountMismatch { expected, found: vectors.len() });
    }
    if let Some((row, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != dimension) {
        return Err(EmbedError::DimensionMismatch { expected: dimension, found: v.len(), row: Some(row) });
    }
    Ok(())
}

/// Loads an embedding file and checks it against the tokens it should describe.
pub fn load_embeddings_file(path: impl AsRef<Path>, expected: &TokenSequence) -> Result<EmbeddingMatrix, EmbedError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| EmbedError::Io { path: shown.clone(), source })?;
    let file: EmbeddingFile =
        serde_json::from_str(&content).map_err(|e| EmbedError::Parse { path: shown.clone(), line: e.line(), message: e.to_string() })?;
    if !file.tokens.is_empty() && file.tokens.len() != file.vectors.len() {
        return Err(EmbedError::Parse {
            path: shown,
            line: 0,
            message: format!("{} tokens but {} vectors", file.tokens.len(), file.vectors.len()),
        });
    }
    check_rows(&file.vectors, file.dimension, expected.len())?;
    for (index, (found, want)) in file.tokens.iter().zip(expected.normalized()).enumerate() {
        if found != want {
            return Err(EmbedError::TokenMismatch { index, expected: want.to_owned(), found: found.clone() });
        }
    }
    EmbeddingMatrix::new(file.vectors)
}

/// Writes `matrix` in the embedding file format, one vector per line.
pub fn save_embeddings_file(path: impl AsRef<Path>, tokens: &TokenSequence, matrix: &EmbeddingMatrix) -> Result<(), EmbedError> {
    let path = path.as_ref();
    let io = |source| EmbedError::Io { path: path.display().to_string(), source };
    let tokens: Vec<&str> = tokens.normalized().collect();
    let mut out = String::new();
    out.push_str(&format!(
        "{{\n  \"dimension\": {},\n  \"tokens\": {},\n  \"vectors\": [\n",
        matrix.dimension(),
        serde_json::to_string(&tokens).expect("strings serialize")
    ));
    let rows = matrix.to_rows();
    for (i, row) in rows.iter().enumerate() {
        let sep = if i + 1 < rows.len() { "," } else { "" };
        out.push_str(&format!("    {}{sep}\n", serde_json::to_string(row).expect("floats serialize")));
    }
    out.push_str("  ]\n}\n");
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(out.as_bytes()).map_err(io)
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    dimension: usize,
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct ErrorResponse {
    error: String,
}

enum Attempt {
    Transient(EmbedError),
    Fatal(EmbedError),
}

/// POSTs the normalized tokens to `{endpoint}/embed`. Transient failures
/// (timeouts, connection errors, 5xx) are retried once.
pub fn fetch_embeddings_http(spec: &ProviderSpec, tokens: &TokenSequence) -> Result<EmbeddingMatrix, EmbedError> {
    let ProviderSpec::Http { endpoint, timeout } = spec else {
        return Err(EmbedError::InvalidSpec(spec.to_string()));
    };
    let agent = ureq::AgentBuilder::new().timeout(*timeout).build();
    let url = format!("{}/embed", endpoint.trim_end_matches('/'));
    let body = EmbedRequest { tokens: tokens.normalized().collect() };

    let mut last = None;
    for _ in 0..2 {
        match attempt(&agent, &url, endpoint, *timeout, &body) {
            Ok(resp) => {
                check_rows(&resp.vectors, resp.dimension, tokens.len())?;
                return EmbeddingMatrix::new(resp.vectors);
            }
            Err(Attempt::Fatal(e)) => return Err(e),
            Err(Attempt::Transient(e)) => last = Some(e),
        }
    }
    Err(last.expect("two attempts were made"))
}

fn attempt(agent: &ureq::Agent, url: &str, endpoint: &str, timeout: Duration, body: &EmbedRequest<'_>) -> Result<EmbedResponse, Attempt> {
    let protocol = |message: String| EmbedError::Protocol { endpoint: endpoint.to_owned(), message };
    match agent.post(url).send_json(body) {
        Ok(resp) if resp.status() == 200 => {
            resp.into_json::<EmbedResponse>().map_err(|e| Attempt::Fatal(protocol(format!("malformed response body: {e}"))))
        }
        Ok(resp) => Err(Attempt::Fatal(protocol(format!("unexpected status {}", resp.status())))),
        Err(ureq::Error::Status(code, resp)) => {
            let detail = resp
                .into_string()
                .ok()
                .and_then(|s| serde_json::from_str::<ErrorResponse>(&s).ok())
                .map(|e| e.error)
                .unwrap_or_else(|| "no error message".into());
            let err = protocol(format!("status {code}: {detail}"));
            if code >= 500 {
                Err(Attempt::Transient(err))
            } else {
                Err(Attempt::Fatal(err))
            }
        }
        Err(ureq::Error::Transport(t)) => {
            let timed_out = std::error::Error::source(&t)
                .and_then(|s| s.downcast_ref::<std::io::Error>())
                .is_some_and(|io| matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock));
            if timed_out {
                Err(Attempt::Transient(EmbedError::Timeout { endpoint: endpoint.to_owned(), timeout_ms: timeout.as_millis() as u64 }))
            } else {
                Err(Attempt::Transient(EmbedError::Unreachable { endpoint: endpoint.to_owned(), message: t.to_string() }))
            }
        }
    }
}

/// Unit vector for one normalized token (see the module docs for the recipe).
pub fn deterministic_vector(seed: u64, dimension: usize, token: &str) -> Vec<f64> {
    let mut v = Vec::with_capacity(dimension);
    let mut block: u32 = 0;
    while v.len() < dimension {
        let mut h = Sha256::new();
        h.update(DETERMINISTIC_DOMAIN);
        h.update(seed.to_le_bytes());
        h.update((token.len() as u64).to_le_bytes());
        h.update(token.as_bytes());
        h.update(block.to_le_bytes());
        let digest = h.finalize();
        for word in digest.chunks_exact(8) {
            if v.len() == dimension {
                break;
            }
            let w = u64::from_le_bytes(word.try_into().expect("8-byte chunk"));
            let unit = (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            v.push(2.0 * unit - 1.0);
        }
        block += 1;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < MIN_NORM {
        // probability ~2^-53 per component; pin to the first axis
        v.iter_mut().for_each(|x| *x = 0.0);
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Seeded per-token vectors; equal normalized tokens get equal rows.
pub fn deterministic_embeddings(seed: u64, dimension: usize, tokens: &TokenSequence) -> Result<EmbeddingMatrix, EmbedError> {
    if dimension == 0 {
        return Err(EmbedError::DimensionMismatch { expected: 1, found: 0, row: None });
    }
    if tokens.is_empty() {
        return Err(EmbedError::EmptyMatrix);
    }
    let mut cache: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut data = Vec::with_capacity(tokens.len() * dimension);
    for tok in tokens.normalized() {
        let row = cache.entry(tok).or_insert_with(|| deterministic_vector(seed, dimension, tok));
        data.extend_from_slice(row);
    }
    EmbeddingMatrix::from_flat(data, dimension)
}
