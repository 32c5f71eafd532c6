use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CorpusError, LanguageTag, TaggedPair};
use crate::text::{Token, TokenSequence};

/// A sentence and its masked copy, both tagged `de_DE`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedPair {
    pub masked: TokenSequence,
    pub original: TokenSequence,
    pub tag: LanguageTag,
    pub seed: u64,
}

impl MaskedPair {
    pub fn masked_positions(&self) -> Vec<usize> {
        self.masked.iter().zip(&self.original).enumerate().filter(|(_, (m, o))| m != o).map(|(i, _)| i).collect()
    }

    pub fn to_tagged(&self) -> TaggedPair {
        TaggedPair { src_tag: self.tag, tgt_tag: self.tag, src: self.masked.surface_text(), tgt: self.original.surface_text() }
    }
}

/// Number of words masked in a sentence with `words` word tokens.
pub fn mask_count(words: usize, rate: f64) -> usize {
    ((rate * words as f64).floor() as usize).max(1).min(words)
}

/// Shuffles the sentences and masks `max(1, floor(rate * words))` word tokens
/// in each. Sentences without word tokens are dropped.
///
/// Stream 0 of a ChaCha8 generator seeded with `seed` drives the shuffle;
/// the sentence at output position `k` draws its mask positions from stream
/// `k + 1`, so the output does not depend on thread scheduling.
pub fn generate_masked_pairs(sentences: &[TokenSequence], rate: f64, seed: u64) -> Result<Vec<MaskedPair>, CorpusError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(CorpusError::RateOutOfRange(rate));
    }
    if sentences.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let mut order: Vec<&TokenSequence> = sentences.iter().filter(|s| s.word_count() > 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    Ok(order
        .par_iter()
        .enumerate()
        .map(|(k, sentence)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let words: Vec<usize> = sentence.iter().enumerate().filter(|(_, t)| !t.is_punctuation).map(|(i, _)| i).collect();
            let mut tokens = sentence.tokens().to_vec();
            for pick in index::sample(&mut rng, words.len(), mask_count(words.len(), rate)) {
                tokens[words[pick]] = Token::mask();
            }
            MaskedPair { masked: TokenSequence::new(tokens), original: (*sentence).clone(), tag: LanguageTag::DeDe, seed }
        })
        .collect())
}
