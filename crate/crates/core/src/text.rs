//! Tokenization, normalization and sentence splitting.
//!
//! Every metric in this crate consumes a [`TokenSequence`] produced here, so the
//! rules are deliberately small and fully deterministic:
//!
//! * text is split on whitespace;
//! * leading and trailing non-word characters are detached, one token per character;
//! * word-internal hyphens and dots are kept (`Hans-Peter`, `z.B`);
//! * apostrophes (`'`, `’`) always separate and become punctuation tokens;
//! * the reserved mask symbol [`MASK_TOKEN`] is always a single token;
//! * the normalized form is the Unicode default lowercase mapping of the surface.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Reserved token substituted for masked words.
pub const MASK_TOKEN: &str = "<mask>";

const APOSTROPHES: [char; 2] = ['\'', '\u{2019}'];
const SENTENCE_FINAL: [&str; 4] = [".", "!", "?", "\u{2026}"];
const CLOSING: [char; 9] = ['"', '\'', '\u{201D}', '\u{201C}', '\u{2019}', '\u{00BB}', '\u{00AB}', ')', ']'];

/// Abbreviations that never end a sentence unless configured otherwise.
pub const DEFAULT_ABBREVIATIONS: &[&str] =
    &["Dr.", "Nr.", "z.B.", "usw.", "bzw.", "ca.", "etc.", "Hr.", "Fr.", "Prof.", "St.", "vgl.", "d.h.", "u.a."];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub is_punctuation: bool,
}

impl Token {
    pub fn new(surface: &str) -> Self {
        debug_assert!(!surface.is_empty());
        let is_punctuation = surface != MASK_TOKEN && !surface.chars().any(char::is_alphanumeric);
        Token { surface: surface.to_owned(), normalized: surface.to_lowercase(), is_punctuation }
    }

    pub fn mask() -> Self {
        Token::new(MASK_TOKEN)
    }

    pub fn is_mask(&self) -> bool {
        self.surface == MASK_TOKEN
    }
}

/// Ordered tokens of one text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>) -> Self {
        TokenSequence { tokens }
    }

    /// Builds a sequence from already-split surfaces, one token per item.
    pub fn from_surfaces<I, S>(surfaces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenSequence { tokens: surfaces.into_iter().map(|s| Token::new(s.as_ref())).collect() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn normalized(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|t| t.normalized.as_str())
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| !t.is_punctuation).count()
    }

    pub fn slice(&self, span: SentenceSpan) -> TokenSequence {
        TokenSequence::new(self.tokens[span.start..span.end].to_vec())
    }

    /// Surfaces joined with single spaces.
    pub fn surface_text(&self) -> String {
        join(self.tokens.iter().map(|t| t.surface.as_str()))
    }

    /// Normalized forms joined with single spaces.
    pub fn normalized_text(&self) -> String {
        join(self.normalized())
    }

    /// Maps normalized tokens to dense ids in order of first appearance.
    pub fn symbol_ids(&self) -> Vec<u32> {
        let mut ids = rustc_hash::FxHashMap::default();
        self.tokens
            .iter()
            .map(|t| {
                let next = ids.len() as u32;
                *ids.entry(t.normalized.as_str()).or_insert(next)
            })
            .collect()
    }
}

fn join<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for (i, p) in parts.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(p);
    }
    out
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface_text())
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a Token;
    type IntoIter = std::slice::Iter<'a, Token>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Half-open token range `[start, end)` of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
}

impl SentenceSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

// Combining marks belong to the preceding letter.
fn is_combining_mark(c: char) -> bool {
    matches!(c as u32,
        0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

/// Tokenizes `text` with the crate-wide rule set.
pub fn tokenize(text: &str) -> TokenSequence {
    TokenSequence::new(tokenize_with_offsets(text).into_iter().map(|(t, _)| t).collect())
}

/// Like [`tokenize`], also returning the byte range of each token in `text`.
pub fn tokenize_with_offsets(text: &str) -> Vec<(Token, Range<usize>)> {
    let mut out = Vec::new();
    for (chunk_start, chunk) in whitespace_chunks(text) {
        let mut rest = chunk;
        let mut offset = chunk_start;
        while let Some(pos) = rest.find(MASK_TOKEN) {
            split_piece(&rest[..pos], offset, &mut out);
            let mask_start = offset + pos;
            out.push((Token::mask(), mask_start..mask_start + MASK_TOKEN.len()));
            offset = mask_start + MASK_TOKEN.len();
            rest = &rest[pos + MASK_TOKEN.len()..];
        }
        split_piece(rest, offset, &mut out);
    }
    out
}

fn whitespace_chunks(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split(char::is_whitespace).filter(|s| !s.is_empty()).map(move |s| (s.as_ptr() as usize - text.as_ptr() as usize, s))
}

// Splits a whitespace-free piece at apostrophes, then peels off edge punctuation.
fn split_piece(piece: &str, offset: usize, out: &mut Vec<(Token, Range<usize>)>) {
    let mut start = 0;
    for (i, c) in piece.char_indices() {
        if APOSTROPHES.contains(&c) {
            peel(&piece[start..i], offset + start, out);
            let end = i + c.len_utf8();
            out.push((Token::new(&piece[i..end]), offset + i..offset + end));
            start = end;
        }
    }
    peel(&piece[start..], offset + start, out);
}

fn peel(piece: &str, offset: usize, out: &mut Vec<(Token, Range<usize>)>) {
    if piece.is_empty() {
        return;
    }
    let first_word = piece.char_indices().find(|&(_, c)| is_word_char(c)).map(|(i, _)| i);
    let Some(core_start) = first_word else {
        push_chars(piece, offset, out);
        return;
    };
    let core_end = piece.char_indices().rev().find(|&(_, c)| is_word_char(c)).map(|(i, c)| i + c.len_utf8()).expect("a word char exists");
    push_chars(&piece[..core_start], offset, out);
    out.push((Token::new(&piece[core_start..core_end]), offset + core_start..offset + core_end));
    push_chars(&piece[core_end..], offset + core_end, out);
}

fn push_chars(s: &str, offset: usize, out: &mut Vec<(Token, Range<usize>)>) {
    for (i, c) in s.char_indices() {
        let end = i + c.len_utf8();
        out.push((Token::new(&s[i..end]), offset + i..offset + end));
    }
}

/// Rule-based sentence splitter with an abbreviation list.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        SentenceSplitter::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbreviations.into_iter().map(|a| a.as_ref().trim().to_lowercase()).filter(|a| !a.is_empty()).collect();
        SentenceSplitter { abbreviations }
    }

    /// Reads one abbreviation per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Ok(Self::with_abbreviations(content.lines().filter(|l| !l.trim_start().starts_with('#'))))
    }

    pub fn is_abbreviation(&self, candidate: &str) -> bool {
        self.abbreviations.contains(&candidate.to_lowercase())
    }

    /// Splits `text` into sentences. Every token of `tokenize(text)` lands in
    /// exactly one sentence, in order.
    pub fn split(&self, text: &str) -> Vec<(SentenceSpan, TokenSequence)> {
        let tokens = tokenize_with_offsets(text);
        let mut spans = Vec::new();
        let mut start = 0;
        let mut k = 0;
        while k < tokens.len() {
            if !SENTENCE_FINAL.contains(&tokens[k].0.surface.as_str()) || self.ends_abbreviation(&tokens, k) {
                k += 1;
                continue;
            }
            // closing quotes and brackets glued to the terminal stay in the sentence
            let mut last = k;
            while last + 1 < tokens.len()
                && tokens[last + 1].1.start == tokens[last].1.end
                && tokens[last + 1].0.surface.chars().all(|c| CLOSING.contains(&c))
            {
                last += 1;
            }
            if last + 1 < tokens.len() && boundary_follows(text, tokens[last].1.end) {
                spans.push(SentenceSpan { start, end: last + 1 });
                start = last + 1;
            }
            k = last + 1;
        }
        if start < tokens.len() {
            spans.push(SentenceSpan { start, end: tokens.len() });
        }
        let seq = TokenSequence::new(tokens.into_iter().map(|(t, _)| t).collect());
        spans.into_iter().map(|span| (span, seq.slice(span))).collect()
    }

    fn ends_abbreviation(&self, tokens: &[(Token, Range<usize>)], k: usize) -> bool {
        if tokens[k].0.surface != "." || k == 0 {
            return false;
        }
        let (prev, prev_range) = &tokens[k - 1];
        if prev_range.end != tokens[k].1.start || prev.is_punctuation {
            return false;
        }
        self.is_abbreviation(&format!("{}.", prev.surface))
    }
}

// True when whitespace follows `at` and the next letter or digit is uppercase
// (or nothing alphanumeric follows at all).
fn boundary_follows(text: &str, at: usize) -> bool {
    let rest = &text[at..];
    if !rest.starts_with(char::is_whitespace) {
        return false;
    }
    match rest.chars().find(|c| c.is_alphanumeric()) {
        Some(c) => c.is_uppercase(),
        None => true,
    }
}

/// Splits with the default abbreviation list.
pub fn split_sentences(text: &str) -> Vec<(SentenceSpan, TokenSequence)> {
    SentenceSplitter::default().split(text)
}
