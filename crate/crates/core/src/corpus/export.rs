use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, LanguageTag};

/// One training record: tagged source and target text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedPair {
    pub src_tag: LanguageTag,
    pub tgt_tag: LanguageTag,
    pub src: String,
    pub tgt: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    /// `{"src_tag": .., "tgt_tag": .., "src": .., "tgt": ..}` per line.
    #[default]
    JsonLines,
}

pub fn export_pairs(pairs: &[TaggedPair], path: impl AsRef<Path>, format: ExportFormat) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io = |e| CorpusError::io(path, e);
    let mut out = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    match format {
        ExportFormat::JsonLines => {
            for pair in pairs {
                serde_json::to_writer(&mut out, pair).map_err(|e| io(e.into()))?;
                out.write_all(b"\n").map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

pub fn import_pairs(path: impl AsRef<Path>) -> Result<Vec<TaggedPair>, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        pairs.push(serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            origin: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_masked_pairs;
    use crate::text::{split_sentences, tokenize};

    #[test]
    fn round_trip() {
        let text = "Nathanael an Lothar. Gewiß seid Ihr alle voll Unruhe. Und es ist wahr!";
        let sentences: Vec<_> = split_sentences(text).into_iter().map(|(_, s)| s).collect();
        let pairs: Vec<TaggedPair> = generate_masked_pairs(&sentences, 0.15, 5).unwrap().iter().map(|p| p.to_tagged()).collect();
        assert_eq!(pairs.len(), 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.jsonl");
        export_pairs(&pairs, &path, ExportFormat::JsonLines).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content.lines().count(), 3);
        assert!(content.starts_with("{\"src_tag\":\"de_DE\",\"tgt_tag\":\"de_DE\",\"src\":"));
        let back = import_pairs(&path).unwrap();
        assert_eq!(back, pairs);
        // the exported text re-tokenizes to the same tokens, masks included
        for p in &back {
            assert_eq!(tokenize(&p.src).len(), tokenize(&p.tgt).len());
        }
    }

    #[test]
    fn empty_and_unwritable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        export_pairs(&[], &path, ExportFormat::JsonLines).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
        assert!(import_pairs(&path).unwrap().is_empty());
        let bad = dir.path().join("missing-dir").join("x.jsonl");
        assert!(matches!(export_pairs(&[], &bad, ExportFormat::JsonLines), Err(CorpusError::Io { .. })));
    }
}
