//! Redundancy measures over token sequences: bag-of-words entropy and the
//! shortest-unique-prefix (match-length) entropy estimator.
//!
//! For the match-length estimator, a sequence `x_0 .. x_{T-1}` gives `M = T + 1`
//! and horizon `N = floor(M / 2)`. For `i = 1 ..= N` the match length `l_i` is
//! one more than the longest prefix of `x_i ..` that also starts at some
//! `j < i` (the match may run past `i - 1`). When the whole remainder reappears,
//! `l_i = T - i + 1`. The estimate is
//!
//! ```text
//! H = [ (1/N) * sum_{i=1..N} l_i / log(i + 1) ]^-1
//! ```

pub mod suffix;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::TokenSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntropyError {
    #[error("sequence of {len} tokens is too short; at least 2 are required")]
    SequenceTooShort { len: usize },
    #[error("evaluation horizon is zero")]
    DegenerateHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Base2,
    Natural,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Base2 => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" | "base2" => Ok(LogBase::Base2),
            "e" | "natural" | "ln" => Ok(LogBase::Natural),
            other => Err(format!("unknown log base {other:?}; expected 2 or e")),
        }
    }
}

/// Token frequency table over normalized forms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BowDistribution {
    counts: HashMap<String, usize>,
    total: usize,
}

impl BowDistribution {
    pub fn from_sequence(seq: &TokenSequence) -> Self {
        let mut counts = HashMap::new();
        for tok in seq.normalized() {
            *counts.entry(tok.to_owned()).or_insert(0) += 1;
        }
        BowDistribution { counts, total: seq.len() }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, token: &str) -> usize {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        if self.counts.len() <= 1 {
            return 0.0;
        }
        let n = self.total as f64;
        // sorted so the floating-point sum does not depend on hash order
        let mut counts: Vec<usize> = self.counts.values().copied().collect();
        counts.sort_unstable();
        counts
            .into_iter()
            .map(|c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum()
    }
}

/// Bag-of-words entropy in bits per token.
pub fn bow_entropy(seq: &TokenSequence) -> f64 {
    BowDistribution::from_sequence(seq).entropy_bits()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchLengthProfile {
    /// `l_1 ..= l_N`, stored at index `i - 1`.
    pub match_lengths: Vec<usize>,
    pub sequence_len: usize,
}

impl MatchLengthProfile {
    /// `M`, the sequence length plus one.
    pub fn m(&self) -> usize {
        self.sequence_len + 1
    }

    /// `N = floor(M / 2)`.
    pub fn horizon(&self) -> usize {
        self.match_lengths.len()
    }
}

/// `N = floor((len + 1) / 2)`.
pub fn horizon_for(len: usize) -> usize {
    len.div_ceil(2)
}

fn check_len(seq: &TokenSequence) -> Result<(), EntropyError> {
    if seq.len() < 2 {
        return Err(EntropyError::SequenceTooShort { len: seq.len() });
    }
    Ok(())
}

/// Exhaustive-scan reference computation of the match lengths.
pub fn sup_match_lengths_naive(seq: &TokenSequence) -> Result<MatchLengthProfile, EntropyError> {
    check_len(seq)?;
    Ok(naive_profile(&seq.symbol_ids()))
}

pub(crate) fn naive_profile(x: &[u32]) -> MatchLengthProfile {
    let len = x.len();
    let horizon = horizon_for(len);
    let match_lengths = (1..=horizon)
        .map(|i| {
            let cap = len - i;
            let mut best = 0;
            for j in 0..i {
                let k = x[i..].iter().zip(&x[j..]).take_while(|(a, b)| a == b).count();
                best = best.max(k);
                if best == cap {
                    break;
                }
            }
            best + 1
        })
        .collect();
    MatchLengthProfile { match_lengths, sequence_len: len }
}

/// Match lengths via a suffix array and the longest-previous-factor array.
/// Same output as [`sup_match_lengths_naive`] in O(M log M).
pub fn sup_match_lengths_indexed(seq: &TokenSequence) -> Result<MatchLengthProfile, EntropyError> {
    check_len(seq)?;
    Ok(indexed_profile(&seq.symbol_ids()))
}

pub(crate) fn indexed_profile(x: &[u32]) -> MatchLengthProfile {
    let horizon = horizon_for(x.len());
    let lpf = suffix::longest_previous_factor(x);
    MatchLengthProfile { match_lengths: lpf[1..=horizon].iter().map(|&k| k + 1).collect(), sequence_len: x.len() }
}

/// Inverse mean of `l_i / log(i + 1)`.
pub fn sup_entropy(profile: &MatchLengthProfile, base: LogBase) -> Result<f64, EntropyError> {
    let n = profile.horizon();
    if n == 0 {
        return Err(EntropyError::DegenerateHorizon);
    }
    let sum: f64 = profile.match_lengths.iter().enumerate().map(|(idx, &l)| l as f64 / base.log((idx + 2) as f64)).sum();
    Ok(n as f64 / sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub bow_bits: f64,
    pub sup_value: f64,
    pub log_base: LogBase,
}

/// Both entropy columns for one text.
pub fn entropy(seq: &TokenSequence, base: LogBase) -> Result<EntropyResult, EntropyError> {
    let profile = sup_match_lengths_indexed(seq)?;
    Ok(EntropyResult { bow_bits: bow_entropy(seq), sup_value: sup_entropy(&profile, base)?, log_base: base })
}
