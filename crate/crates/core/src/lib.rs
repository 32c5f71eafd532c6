//! Evaluation toolkit and corpus pipeline for document-level German text
//! simplification.
//!
//! * [`text`]: tokenizer and sentence splitter shared by every metric
//! * [`entropy`]: bag-of-words and match-length (shortest unique prefix) entropy
//! * [`ngram`]: document-level BLEU and ROUGE-L
//! * [`embed`]: greedy-matching embedding similarity and embedding providers
//! * [`corpus`]: document-pair manifests, splits, masking for domain adaptation
//! * [`diagnostics`]: copying, repetition and truncation measures
//! * [`harness`]: corpus evaluation, early stopping, report tables

pub mod corpus;
pub mod diagnostics;
pub mod embed;
pub mod entropy;
pub mod harness;
pub mod ngram;
pub mod text;

pub use text::{tokenize, Token, TokenSequence};

/// Environment variable holding the default embedding provider spec.
pub const PROVIDER_ENV: &str = "SIMPEVAL_PROVIDER";
