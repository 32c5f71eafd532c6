//! Measurable signatures of degenerate generations: verbatim copying of the
//! source, repeated sentences and n-grams, and truncation.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::suffix::longest_previous_factor;
use crate::ngram::lcs_len;
use crate::text::{SentenceSplitter, TokenSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("source text is empty")]
    EmptySource,
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
}

/// Share of the output that is an in-order copy of the source:
/// `LCS(output, source) / |output|`.
pub fn copy_rate(output: &TokenSequence, source: &TokenSequence) -> Result<f64, DiagnosticsError> {
    if source.is_empty() {
        return Err(DiagnosticsError::EmptySource);
    }
    if output.is_empty() {
        return Ok(0.0);
    }
    let out: Vec<&str> = output.normalized().collect();
    let src: Vec<&str> = source.normalized().collect();
    Ok(lcs_len(&out, &src) as f64 / out.len() as f64)
}

pub fn compression_ratio(output: &TokenSequence, source: &TokenSequence) -> Result<f64, DiagnosticsError> {
    if source.is_empty() {
        return Err(DiagnosticsError::EmptySource);
    }
    Ok(output.len() as f64 / source.len() as f64)
}

/// Fraction of n-gram positions whose n-gram already occurred earlier.
pub fn repeated_ngram_rate(output: &TokenSequence, n: usize) -> Result<f64, DiagnosticsError> {
    if n == 0 {
        return Err(DiagnosticsError::InvalidOrder(n));
    }
    let tokens: Vec<&str> = output.normalized().collect();
    if tokens.len() < n {
        return Ok(0.0);
    }
    let mut seen = HashSet::new();
    let positions = tokens.len() - n + 1;
    let repeated = tokens.windows(n).filter(|g| !seen.insert(*g)).count();
    Ok(repeated as f64 / positions as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatedSentence {
    /// Normalized tokens joined by spaces.
    pub sentence: String,
    pub multiplicity: usize,
    pub first_index: usize,
}

/// Sentences that occur at least twice (exact normalized match), most
/// frequent first, ties by first occurrence.
pub fn repeated_sentence_report(sentences: &[TokenSequence]) -> Vec<RepeatedSentence> {
    let mut groups: HashMap<String, (usize, usize)> = HashMap::new();
    for (i, s) in sentences.iter().enumerate() {
        groups.entry(s.normalized_text()).or_insert((0, i)).0 += 1;
    }
    let mut repeated: Vec<RepeatedSentence> = groups
        .into_iter()
        .filter(|(_, (count, _))| *count >= 2)
        .map(|(sentence, (multiplicity, first_index))| RepeatedSentence { sentence, multiplicity, first_index })
        .collect();
    repeated.sort_by(|a, b| b.multiplicity.cmp(&a.multiplicity).then(a.first_index.cmp(&b.first_index)));
    repeated
}

/// Longest token span that occurs at least twice (occurrences may overlap).
pub fn longest_repeated_span(output: &TokenSequence) -> usize {
    longest_previous_factor(&output.symbol_ids()).into_iter().max().unwrap_or(0)
}

pub const NGRAM_ORDERS: std::ops::RangeInclusive<usize> = 1..=8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub copy_rate: f64,
    pub compression_ratio: f64,
    pub repeated_sentence_count: usize,
    pub repeated_sentences: Vec<RepeatedSentence>,
    /// Index `n - 1` holds the rate for order `n`, for `n` in 1..=8.
    pub repeated_ngram_rate: Vec<f64>,
    pub longest_repeated_span: usize,
}

/// Runs every diagnostic on one generated text against its source text.
pub fn diagnose(output_text: &str, source_text: &str, splitter: &SentenceSplitter) -> Result<DiagnosticsReport, DiagnosticsError> {
    let sentences: Vec<TokenSequence> = splitter.split(output_text).into_iter().map(|(_, s)| s).collect();
    let output = TokenSequence::new(sentences.iter().flat_map(|s| s.tokens().iter().cloned()).collect());
    let source = crate::text::tokenize(source_text);
    let repeated = repeated_sentence_report(&sentences);
    Ok(DiagnosticsReport {
        copy_rate: copy_rate(&output, &source)?,
        compression_ratio: compression_ratio(&output, &source)?,
        repeated_sentence_count: repeated.len(),
        repeated_sentences: repeated,
        repeated_ngram_rate: NGRAM_ORDERS.map(|n| repeated_ngram_rate(&output, n)).collect::<Result<_, _>>()?,
        longest_repeated_span: longest_repeated_span(&output),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_surfaces(s.split_whitespace())
    }

    #[test]
    fn copy_rate_examples() {
        let s = seq("a b c");
        assert_eq!(copy_rate(&s, &s), Ok(1.0));
        assert_eq!(copy_rate(&seq("x y"), &seq("a b")), Ok(0.0));
        assert!((copy_rate(&seq("a x b"), &seq("a b c")).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(copy_rate(&TokenSequence::default(), &s), Ok(0.0));
        assert_eq!(copy_rate(&s, &TokenSequence::default()), Err(DiagnosticsError::EmptySource));
        // extra never-matching source tokens do not change the rate
        assert_eq!(copy_rate(&seq("a x b"), &seq("a b c q r s")), copy_rate(&seq("a x b"), &seq("a b c")));
    }

    #[test]
    fn compression_examples() {
        let s = seq("a b c");
        assert_eq!(compression_ratio(&s, &s), Ok(1.0));
        assert_eq!(compression_ratio(&TokenSequence::default(), &s), Ok(0.0));
        let out = TokenSequence::from_surfaces(vec!["w"; 250]);
        let src = TokenSequence::from_surfaces(vec!["w"; 1000]);
        assert_eq!(compression_ratio(&out, &src), Ok(0.25));
        assert_eq!(compression_ratio(&s, &TokenSequence::default()), Err(DiagnosticsError::EmptySource));
    }

    #[test]
    fn ngram_rate_examples() {
        let constant = TokenSequence::from_surfaces(vec!["so"; 10]);
        assert_eq!(repeated_ngram_rate(&constant, 1), Ok(0.9));
        assert_eq!(repeated_ngram_rate(&seq("a b c d"), 1), Ok(0.0));
        assert!((repeated_ngram_rate(&seq("a b a b"), 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(repeated_ngram_rate(&seq("a b"), 3), Ok(0.0));
        assert_eq!(repeated_ngram_rate(&seq("a b"), 0), Err(DiagnosticsError::InvalidOrder(0)));
    }

    #[test]
    fn repeated_sentences() {
        let tat = tokenize("So ist es in der Tat");
        let mut doc = vec![tat.clone(); 4];
        doc.insert(2, tokenize("Nathanael schrieb."));
        let report = repeated_sentence_report(&doc);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].multiplicity, 4);
        assert_eq!(report[0].sentence, "so ist es in der tat");
        assert!(repeated_sentence_report(&[tokenize("a"), tokenize("b")]).is_empty());
        assert!(repeated_sentence_report(&[]).is_empty());

        let doc = vec![tokenize("b"), tokenize("a"), tokenize("a"), tokenize("b"), tokenize("a")];
        let report = repeated_sentence_report(&doc);
        assert_eq!((report[0].sentence.as_str(), report[0].multiplicity), ("a", 3));
        assert_eq!((report[1].sentence.as_str(), report[1].multiplicity), ("b", 2));
    }

    #[test]
    fn full_report() {
        let out = "So ist es in der Tat. Er kam. So ist es in der Tat. So ist es in der Tat.";
        let src = "Er kam nach Hause. So ist es in der Tat.";
        let r = diagnose(out, src, &SentenceSplitter::default()).unwrap();
        assert_eq!(r.repeated_sentence_count, 1);
        assert_eq!(r.repeated_sentences[0].multiplicity, 3);
        assert_eq!(r.repeated_ngram_rate.len(), 8);
        assert_eq!(r.longest_repeated_span, 8);
        assert!(r.compression_ratio > 1.0);
    }

    fn brute_rate(tokens: &[u8], n: usize) -> f64 {
        if tokens.len() < n {
            return 0.0;
        }
        let positions = tokens.len() - n + 1;
        let repeated = (0..positions).filter(|&p| (0..p).any(|q| tokens[q..q + n] == tokens[p..p + n])).count();
        repeated as f64 / positions as f64
    }

    proptest! {
        #[test]
        fn ngram_rate_brute_force_and_monotone(tokens in proptest::collection::vec(0u8..4, 0..=64)) {
            let s = TokenSequence::from_surfaces(tokens.iter().map(|t| t.to_string()));
            let mut prev = f64::INFINITY;
            for n in 1..=8 {
                let r = repeated_ngram_rate(&s, n).unwrap();
                prop_assert_eq!(r, brute_rate(&tokens, n));
                prop_assert!(r <= prev);
                prev = r;
            }
        }

        #[test]
        fn multiplicities_sum(ids in proptest::collection::vec(0u8..5, 0..40)) {
            let doc: Vec<TokenSequence> = ids.iter().map(|i| tokenize(&format!("satz {i}"))).collect();
            let report = repeated_sentence_report(&doc);
            let mut counts = HashMap::new();
            for i in &ids { *counts.entry(i).or_insert(0usize) += 1; }
            let non_unique: usize = counts.values().filter(|&&c| c >= 2).sum();
            prop_assert_eq!(report.iter().map(|r| r.multiplicity).sum::<usize>(), non_unique);
        }

        #[test]
        fn copy_of_self_is_one(ids in proptest::collection::vec(0u8..6, 1..50)) {
            let s = TokenSequence::from_surfaces(ids.iter().map(|t| t.to_string()));
            prop_assert_eq!(copy_rate(&s, &s), Ok(1.0));
        }
    }
}
