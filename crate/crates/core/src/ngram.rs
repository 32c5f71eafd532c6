//! Document-level BLEU and ROUGE-L over normalized tokens.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::TokenSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NgramError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("invalid BLEU configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Smoothing {
    None,
    /// Zero matched counts are replaced by this value before taking logs.
    Epsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Percent,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub smoothing: Smoothing,
    pub scale: Scale,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_order: 4, smoothing: Smoothing::None, scale: Scale::Percent }
    }
}

impl BleuConfig {
    pub fn validate(&self) -> Result<(), NgramError> {
        if self.max_order == 0 {
            return Err(NgramError::InvalidConfig("max_order must be at least 1".into()));
        }
        if let Smoothing::Epsilon(e) = self.smoothing {
            if e.is_nan() || e <= 0.0 {
                return Err(NgramError::InvalidConfig(format!("epsilon must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// 0..=100 on the percent scale, 0..=1 on the unit scale.
    pub score: f64,
    /// Clipped precision per order, for the orders that took part in the mean.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub hypothesis_len: usize,
    pub reference_len: usize,
    /// Set when the hypothesis is empty; the score is then 0.
    pub degenerate: bool,
}

fn ngram_counts<'a, 'b>(tokens: &'b [&'a str], n: usize) -> HashMap<&'b [&'a str], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Single-reference BLEU with clipped n-gram precision and brevity penalty.
///
/// Orders longer than the hypothesis are left out of the geometric mean, so a
/// hypothesis identical to its reference always scores the maximum.
pub fn bleu(hypothesis: &TokenSequence, reference: &TokenSequence, config: &BleuConfig) -> Result<BleuScore, NgramError> {
    config.validate()?;
    if reference.is_empty() {
        return Err(NgramError::EmptyReference);
    }
    let hyp: Vec<&str> = hypothesis.normalized().collect();
    let refs: Vec<&str> = reference.normalized().collect();
    let (c, r) = (hyp.len(), refs.len());
    if c == 0 {
        return Ok(BleuScore {
            score: 0.0,
            precisions: Vec::new(),
            brevity_penalty: 0.0,
            hypothesis_len: 0,
            reference_len: r,
            degenerate: true,
        });
    }

    let orders = config.max_order.min(c);
    let mut precisions = Vec::with_capacity(orders);
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let hyp_counts = ngram_counts(&hyp, n);
        let ref_counts = ngram_counts(&refs, n);
        let matched: usize = hyp_counts.iter().map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0))).sum();
        let total = c + 1 - n;
        precisions.push(matched as f64 / total as f64);
        let numerator = match config.smoothing {
            Smoothing::Epsilon(eps) if matched == 0 => eps,
            _ => matched as f64,
        };
        log_sum += (numerator / total as f64).ln();
    }
    let brevity_penalty = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    let mut score = brevity_penalty * (log_sum / orders as f64).exp();
    if config.scale == Scale::Percent {
        score *= 100.0;
    }
    Ok(BleuScore { score, precisions, brevity_penalty, hypothesis_len: c, reference_len: r, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub lcs_length: usize,
}

/// Longest common subsequence length, two rolling rows over the shorter input.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// ROUGE-L precision, recall and F1 from the token-level LCS.
pub fn rouge_l(hypothesis: &TokenSequence, reference: &TokenSequence) -> RougeScore {
    let hyp: Vec<&str> = hypothesis.normalized().collect();
    let refs: Vec<&str> = reference.normalized().collect();
    if hyp.is_empty() || refs.is_empty() {
        return RougeScore { precision: 0.0, recall: 0.0, f1: 0.0, lcs_length: 0 };
    }
    let lcs = lcs_len(&hyp, &refs);
    let precision = lcs as f64 / hyp.len() as f64;
    let recall = lcs as f64 / refs.len() as f64;
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    RougeScore { precision, recall, f1, lcs_length: lcs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(text: &str) -> TokenSequence {
        TokenSequence::from_surfaces(text.split_whitespace())
    }

    // exhaustive: every subsequence of the shorter list
    fn lcs_oracle(a: &[u8], b: &[u8]) -> usize {
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let is_subseq = |sub: &[u8]| {
            let mut it = long.iter();
            sub.iter().all(|x| it.any(|y| y == x))
        };
        (0u32..1 << short.len())
            .map(|mask| (0..short.len()).filter(|i| mask >> i & 1 == 1).map(|i| short[i]).collect::<Vec<_>>())
            .filter(|sub| is_subseq(sub))
            .map(|sub| sub.len())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn identity_is_maximal() {
        for text in ["a", "a b", "the cat sat on the mat", "x y z w v u"] {
            let s = seq(text);
            assert_eq!(bleu(&s, &s, &BleuConfig::default()).unwrap().score, 100.0);
            assert_eq!(rouge_l(&s, &s).f1, 1.0);
        }
    }

    #[test]
    fn clipping() {
        let hyp = seq("the the the the the the the");
        let reference = seq("the cat is on the mat");
        let b = bleu(&hyp, &reference, &BleuConfig::default()).unwrap();
        assert!((b.precisions[0] - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(b.brevity_penalty, 1.0);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn zero_four_gram_overlap() {
        let hyp = seq("a b c d x e f g h");
        let reference = seq("a b c y e f g z");
        let b = bleu(&hyp, &reference, &BleuConfig::default()).unwrap();
        assert_eq!(b.precisions[3], 0.0);
        assert_eq!(b.score, 0.0);
        let smoothed = BleuConfig { smoothing: Smoothing::Epsilon(0.1), ..Default::default() };
        assert!(bleu(&hyp, &reference, &smoothed).unwrap().score > 0.0);
    }

    #[test]
    fn brevity_penalty_and_scale() {
        let hyp = seq("a b c d");
        let reference = seq("a b c d e f g h");
        let unit = BleuConfig { scale: Scale::Unit, ..Default::default() };
        let b = bleu(&hyp, &reference, &unit).unwrap();
        assert!((b.brevity_penalty - (-1.0f64).exp()).abs() < 1e-15);
        assert!((b.score - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bleu_errors() {
        let s = seq("a b");
        assert_eq!(bleu(&s, &TokenSequence::default(), &BleuConfig::default()), Err(NgramError::EmptyReference));
        let degenerate = bleu(&TokenSequence::default(), &s, &BleuConfig::default()).unwrap();
        assert!(degenerate.degenerate);
        assert_eq!(degenerate.score, 0.0);
        let bad = BleuConfig { max_order: 0, ..Default::default() };
        assert!(matches!(bleu(&s, &s, &bad), Err(NgramError::InvalidConfig(_))));
        let bad = BleuConfig { smoothing: Smoothing::Epsilon(0.0), ..Default::default() };
        assert!(matches!(bleu(&s, &s, &bad), Err(NgramError::InvalidConfig(_))));
    }

    #[test]
    fn rouge_examples() {
        let r = rouge_l(&seq("a b c d"), &seq("a c d"));
        assert_eq!(r.lcs_length, 3);
        assert_eq!(r.precision, 0.75);
        assert_eq!(r.recall, 1.0);
        assert!((r.f1 - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(rouge_l(&TokenSequence::default(), &seq("a")).f1, 0.0);
        assert_eq!(rouge_l(&seq("a"), &seq("b")).f1, 0.0);
    }

    proptest! {
        #[test]
        fn lcs_matches_exhaustive(a in proptest::collection::vec(0u8..3, 0..=12), b in proptest::collection::vec(0u8..3, 0..=12)) {
            prop_assert_eq!(lcs_len(&a, &b), lcs_oracle(&a, &b));
        }

        #[test]
        fn rouge_symmetric_bleu_bounded(a in proptest::collection::vec(0u8..4, 1..30), b in proptest::collection::vec(0u8..4, 1..30)) {
            let sa = TokenSequence::from_surfaces(a.iter().map(|x| x.to_string()));
            let sb = TokenSequence::from_surfaces(b.iter().map(|x| x.to_string()));
            prop_assert_eq!(rouge_l(&sa, &sb).f1, rouge_l(&sb, &sa).f1);
            let bl = bleu(&sa, &sb, &BleuConfig::default()).unwrap();
            prop_assert!(bl.precisions.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((0.0..=100.0).contains(&bl.score));
            prop_assert_eq!(rouge_l(&sa, &sb).f1 == 1.0, a == b);
            if a == b {
                prop_assert_eq!(bl.score, 100.0);
            }
        }
    }

    #[test]
    fn bleu_is_asymmetric() {
        let a = seq("a b c d e f");
        let b = seq("a b c");
        let ab = bleu(&a, &b, &BleuConfig::default()).unwrap().score;
        let ba = bleu(&b, &a, &BleuConfig::default()).unwrap().score;
        assert_ne!(ab, ba);
    }
}
