//! Document-pair manifests, dev/test/train splits, language tags and the
//! masked-sentence generator used for domain adaptation.

mod export;
mod masking;

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export_pairs, import_pairs, ExportFormat, TaggedPair};
pub use masking::{generate_masked_pairs, MaskedPair};

/// Table of all document pairs, bundled with the crate.
pub const BUNDLED_MANIFEST: &str = include_str!("../../data/documents.jsonl");

pub const DEFAULT_DEV: [&str; 3] = ["mils-stadtmusikanten", "eb-hyde", "pv-schimmelreiter"];
pub const DEFAULT_TEST: [&str; 3] = ["mils-bruder", "eb-christo", "pv-sandmann"];

/// Hosts the fetch helper is allowed to download from (public-domain archives).
pub const PUBLIC_DOMAIN_HOSTS: [&str; 5] =
    ["www.gutenberg.org", "gutenberg.org", "www.projekt-gutenberg.org", "projekt-gutenberg.org", "textgridrep.org"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{origin}: parse error at line {line}: {message}")]
    Parse { origin: String, line: usize, message: String },
    #[error("duplicate source_id {id:?} at line {line}")]
    DuplicateSourceId { id: String, line: usize },
    #[error("source_id {0:?} does not start with one of eb-, kv-, pv-, mils-")]
    InvalidSourceId(String),
    #[error("unknown source_id {0:?}")]
    UnknownSourceId(String),
    #[error("no sentences to mask")]
    EmptyInput,
    #[error("masking rate {0} is outside (0, 1)")]
    RateOutOfRange(f64),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0} is not on the public-domain whitelist")]
    NotWhitelisted(String),
    #[error("download failed: {0}")]
    Download(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.display().to_string(), source }
    }
}

/// Publisher of the Simple-Language side, encoded as the source-id prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimpleSource {
    Eb,
    Kv,
    Pv,
    Mils,
}

impl SimpleSource {
    pub fn from_source_id(id: &str) -> Option<Self> {
        let (prefix, rest) = id.split_once('-')?;
        if rest.is_empty() {
            return None;
        }
        match prefix {
            "eb" => Some(SimpleSource::Eb),
            "kv" => Some(SimpleSource::Kv),
            "pv" => Some(SimpleSource::Pv),
            "mils" => Some(SimpleSource::Mils),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageTag {
    /// Domain-adaptation pairs, both sides.
    #[serde(rename = "de_DE")]
    DeDe,
    /// Standard-German side of a fine-tuning pair.
    #[serde(rename = "de_OR")]
    DeOr,
    /// Simple-German side of a fine-tuning pair.
    #[serde(rename = "de_SI")]
    DeSi,
}

impl LanguageTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguageTag::DeDe => "de_DE",
            LanguageTag::DeOr => "de_OR",
            LanguageTag::DeSi => "de_SI",
        }
    }
}

impl std::fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One manifest line: a Standard-German document and its Simple-German version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentPair {
    pub source_id: String,
    pub title: String,
    /// Original language and publication year, e.g. `German (1816)`.
    pub origin: String,
    pub standard_url: String,
    pub simple_url: String,
    #[serde(default)]
    pub standard_path: Option<PathBuf>,
    #[serde(default)]
    pub simple_path: Option<PathBuf>,
    /// The Standard text is cut at this many characters to match the Simple excerpt.
    #[serde(default)]
    pub standard_cutoff_chars: Option<usize>,
    #[serde(skip)]
    pub standard_text: Option<String>,
    #[serde(skip)]
    pub simple_text: Option<String>,
}

impl DocumentPair {
    pub fn simple_source(&self) -> SimpleSource {
        SimpleSource::from_source_id(&self.source_id).expect("validated at load")
    }

    /// Reads the local texts (paths relative to `base_dir`), applying the cutoff.
    pub fn load_texts(&mut self, base_dir: &Path) -> Result<(), CorpusError> {
        let read = |p: &Path| {
            let full = base_dir.join(p);
            std::fs::read_to_string(&full).map_err(|e| CorpusError::io(&full, e))
        };
        if let Some(p) = &self.standard_path {
            let text = read(p)?;
            self.standard_text = Some(match self.standard_cutoff_chars {
                Some(n) => text.chars().take(n).collect(),
                None => text,
            });
        }
        if let Some(p) = &self.simple_path {
            self.simple_text = Some(read(p)?);
        }
        Ok(())
    }

    /// Fine-tuning pair (`de_OR` → `de_SI`), when both texts are loaded.
    pub fn to_tagged(&self) -> Option<TaggedPair> {
        Some(TaggedPair {
            src_tag: LanguageTag::DeOr,
            tgt_tag: LanguageTag::DeSi,
            src: self.standard_text.clone()?,
            tgt: self.simple_text.clone()?,
        })
    }
}

/// Parses a JSON-lines manifest. `origin` only labels error messages.
pub fn parse_manifest(content: &str, origin: &str) -> Result<Vec<DocumentPair>, CorpusError> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let pair: DocumentPair = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            origin: origin.to_owned(),
            line: line_no,
            message: e.to_string(),
        })?;
        if SimpleSource::from_source_id(&pair.source_id).is_none() {
            return Err(CorpusError::InvalidSourceId(pair.source_id));
        }
        if !seen.insert(pair.source_id.clone()) {
            return Err(CorpusError::DuplicateSourceId { id: pair.source_id, line: line_no });
        }
        pairs.push(pair);
    }
    if pairs.is_empty() {
        return Err(CorpusError::Parse { origin: origin.to_owned(), line: 0, message: "manifest has no records".into() });
    }
    Ok(pairs)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<DocumentPair>, CorpusError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_manifest(&content, &path.display().to_string())
}

/// The bundled manifest.
pub fn bundled_manifest() -> Vec<DocumentPair> {
    parse_manifest(BUNDLED_MANIFEST, "documents.jsonl").expect("bundled manifest is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub dev: BTreeSet<String>,
    pub test: BTreeSet<String>,
    pub train: BTreeSet<String>,
}

impl SplitAssignment {
    pub fn split_of(&self, id: &str) -> Option<Split> {
        if self.dev.contains(id) {
            Some(Split::Dev)
        } else if self.test.contains(id) {
            Some(Split::Test)
        } else if self.train.contains(id) {
            Some(Split::Train)
        } else {
            None
        }
    }

    pub fn ids(&self, split: Split) -> &BTreeSet<String> {
        match split {
            Split::Train => &self.train,
            Split::Dev => &self.dev,
            Split::Test => &self.test,
        }
    }
}

/// Default dev/test selection, then each `(id, split)` move applied in order.
/// Default ids missing from `manifest` are skipped; moved ids must exist.
pub fn assign_splits(manifest: &[DocumentPair], moves: &[(String, Split)]) -> Result<SplitAssignment, CorpusError> {
    let ids: BTreeSet<&str> = manifest.iter().map(|d| d.source_id.as_str()).collect();
    let mut assignment = SplitAssignment::default();
    for id in &ids {
        let split = if DEFAULT_DEV.contains(id) {
            Split::Dev
        } else if DEFAULT_TEST.contains(id) {
            Split::Test
        } else {
            Split::Train
        };
        set_split(&mut assignment, id, split);
    }
    for (id, split) in moves {
        if !ids.contains(id.as_str()) {
            return Err(CorpusError::UnknownSourceId(id.clone()));
        }
        set_split(&mut assignment, id, *split);
    }
    Ok(assignment)
}

fn set_split(a: &mut SplitAssignment, id: &str, split: Split) {
    a.dev.remove(id);
    a.test.remove(id);
    a.train.remove(id);
    let target = match split {
        Split::Train => &mut a.train,
        Split::Dev => &mut a.dev,
        Split::Test => &mut a.test,
    };
    target.insert(id.to_owned());
}

/// Downloads `url` only if it is an https URL on one of `allowed_hosts`.
pub fn fetch_public_domain(url: &str, allowed_hosts: &[&str]) -> Result<String, CorpusError> {
    let host = url
        .strip_prefix("https://")
        .map(|rest| rest.split(['/', '?', '#']).next().unwrap_or(""))
        .ok_or_else(|| CorpusError::NotWhitelisted(url.to_owned()))?;
    if !allowed_hosts.contains(&host) {
        return Err(CorpusError::NotWhitelisted(url.to_owned()));
    }
    ureq::get(url).call().map_err(|e| CorpusError::Download(e.to_string()))?.into_string().map_err(|e| CorpusError::Download(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_manifest_entries() {
        let m = bundled_manifest();
        assert_eq!(m.len(), 22);
        let ids: Vec<&str> = m.iter().map(|d| d.source_id.as_str()).collect();
        assert!(ids.contains(&"pv-sandmann") && ids.contains(&"kv-sandmann"));
        let sandmann = m.iter().filter(|d| d.title == "Der Sandmann").count();
        assert_eq!(sandmann, 2);
        assert_eq!(m.iter().filter(|d| d.simple_source() == SimpleSource::Eb).count(), 11);
        assert_eq!(m.iter().filter(|d| d.simple_source() == SimpleSource::Pv).count(), 7);
    }

    #[test]
    fn manifest_errors() {
        assert!(matches!(parse_manifest("", "x"), Err(CorpusError::Parse { .. })));
        assert!(matches!(parse_manifest("\n\n", "x"), Err(CorpusError::Parse { .. })));
        let line = r#"{"source_id":"eb-hyde","title":"t","origin":"o","standard_url":"u","simple_url":"v"}"#;
        let dup = format!("{line}\n{line}\n");
        assert!(matches!(
            parse_manifest(&dup, "x"),
            Err(CorpusError::DuplicateSourceId { ref id, line: 2 }) if id == "eb-hyde"
        ));
        let bad = line.replace("eb-hyde", "xx-hyde");
        assert!(matches!(parse_manifest(&bad, "x"), Err(CorpusError::InvalidSourceId(_))));
        let broken = format!("{line}\n{{\"source_id\": 3}}\n");
        assert!(matches!(parse_manifest(&broken, "x"), Err(CorpusError::Parse { line: 2, .. })));
    }

    #[test]
    fn default_splits() {
        let m = bundled_manifest();
        let s = assign_splits(&m, &[]).unwrap();
        let set = |ids: [&str; 3]| ids.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(s.dev, set(DEFAULT_DEV));
        assert_eq!(s.test, set(DEFAULT_TEST));
        assert_eq!(s.train.len(), m.len() - 6);
    }

    #[test]
    fn moves() {
        let m = bundled_manifest();
        let s = assign_splits(&m, &[("eb-hyde".into(), Split::Test)]).unwrap();
        assert!(s.test.contains("eb-hyde"));
        assert!(!s.dev.contains("eb-hyde"));
        assert_eq!(s.dev.len() + s.test.len() + s.train.len(), m.len());
        assert!(matches!(assign_splits(&m, &[("eb-nothing".into(), Split::Dev)]), Err(CorpusError::UnknownSourceId(_))));
    }

    #[test]
    fn texts_and_cutoff() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("std.txt"), "Nathanael an Lothar. Gewiß seid Ihr alle voll Unruhe.").unwrap();
        std::fs::write(dir.path().join("simple.txt"), "Nathanael schreibt einen Brief.").unwrap();
        let line = r#"{"source_id":"pv-sandmann","title":"Der Sandmann","origin":"German (1816)","standard_url":"u","simple_url":"v","standard_path":"std.txt","simple_path":"simple.txt","standard_cutoff_chars":20}"#;
        let mut m = parse_manifest(line, "x").unwrap();
        m[0].load_texts(dir.path()).unwrap();
        assert_eq!(m[0].standard_text.as_deref(), Some("Nathanael an Lothar."));
        let tagged = m[0].to_tagged().unwrap();
        assert_eq!((tagged.src_tag, tagged.tgt_tag), (LanguageTag::DeOr, LanguageTag::DeSi));
    }

    #[test]
    fn fetch_rejects_non_whitelisted() {
        for url in ["https://einfachebuecher.de/x", "http://www.gutenberg.org/ebooks/6341", "ftp://gutenberg.org"] {
            assert!(matches!(fetch_public_domain(url, &PUBLIC_DOMAIN_HOSTS), Err(CorpusError::NotWhitelisted(_))));
        }
    }
}
