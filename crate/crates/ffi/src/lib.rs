//! C ABI for the simpeval metrics.
//!
//! Every fallible function returns a [`SimpevalStatus`] and writes its result
//! through an out-pointer. On failure, [`simpeval_last_error`] describes the
//! error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use simpeval::diagnostics::{self, DiagnosticsError};
use simpeval::embed::{greedy_match_score, EmbedError, EmbeddingMatrix};
use simpeval::entropy::{self, EntropyError, LogBase};
use simpeval::harness::{early_stop_select, EarlyStopPolicy};
use simpeval::ngram::{self, BleuConfig, NgramError};
use simpeval::text::{tokenize, TokenSequence};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpevalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    SequenceTooShort = 4,
    EmptyInput = 5,
    DimensionMismatch = 6,
    ZeroVector = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpevalLogBase {
    Two = 0,
    Natural = 1,
}

/// Precision, recall and F1 of one comparison.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimpevalPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimpevalBleu {
    /// 0..100
    pub score: f64,
    pub brevity_penalty: f64,
    pub hypothesis_len: usize,
    pub reference_len: usize,
    /// Set when the hypothesis is empty.
    pub degenerate: bool,
}

/// Opaque tokenized text.
pub struct SimpevalTokens {
    seq: TokenSequence,
    surfaces: Vec<CString>,
    normalized: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(SimpevalStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(SimpevalStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<EntropyError> for Failure {
    fn from(e: EntropyError) -> Self {
        let status = match e {
            EntropyError::SequenceTooShort { .. } => SimpevalStatus::SequenceTooShort,
            _ => SimpevalStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<NgramError> for Failure {
    fn from(e: NgramError) -> Self {
        let status = match e {
            NgramError::EmptyReference => SimpevalStatus::EmptyInput,
            _ => SimpevalStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<DiagnosticsError> for Failure {
    fn from(e: DiagnosticsError) -> Self {
        let status = match e {
            DiagnosticsError::EmptySource => SimpevalStatus::EmptyInput,
            _ => SimpevalStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<EmbedError> for Failure {
    fn from(e: EmbedError) -> Self {
        let status = match e {
            EmbedError::EmptyMatrix => SimpevalStatus::EmptyInput,
            EmbedError::DimensionMismatch { .. } => SimpevalStatus::DimensionMismatch,
            EmbedError::ZeroVector { .. } => SimpevalStatus::ZeroVector,
            _ => SimpevalStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SimpevalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SimpevalStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SimpevalStatus::Panic
        }
    }
}

unsafe fn tokens_ref<'a>(p: *const SimpevalTokens, what: &str) -> Result<&'a SimpevalTokens, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn matrix(data: *const f64, rows: usize, dimension: usize, what: &str) -> Result<EmbeddingMatrix, Failure> {
    if rows == 0 {
        return Err(EmbedError::EmptyMatrix.into());
    }
    if data.is_null() {
        return Err(Failure::null(what));
    }
    let len = rows.checked_mul(dimension).ok_or_else(|| Failure(SimpevalStatus::InvalidArgument, "matrix too large".into()))?;
    let flat = std::slice::from_raw_parts(data, len).to_vec();
    Ok(EmbeddingMatrix::from_flat(flat, dimension)?)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn simpeval_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn simpeval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Tokenizes NUL-terminated UTF-8 `text`. Free the result with
/// [`simpeval_tokens_free`].
///
/// # Safety
/// `text` must be NULL or a valid NUL-terminated string; `out` must be NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_tokenize(text: *const c_char, out: *mut *mut SimpevalTokens) -> SimpevalStatus {
    guard(|| {
        if text.is_null() {
            return Err(Failure::null("text"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| Failure(SimpevalStatus::InvalidUtf8, e.to_string()))?;
        let seq = tokenize(text);
        // the input came from a C string, so no token holds a NUL
        let cstr = |s: &str| CString::new(s).expect("no interior NUL");
        let surfaces = seq.iter().map(|t| cstr(&t.surface)).collect();
        let normalized = seq.iter().map(|t| cstr(&t.normalized)).collect();
        let handle = Box::new(SimpevalTokens { seq, surfaces, normalized });
        if out.is_null() {
            return Err(Failure::null("output pointer"));
        }
        out.write(Box::into_raw(handle));
        Ok(())
    })
}

/// # Safety
/// `tokens` must be NULL or a handle from [`simpeval_tokenize`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simpeval_tokens_free(tokens: *mut SimpevalTokens) {
    if !tokens.is_null() {
        drop(Box::from_raw(tokens));
    }
}

/// Number of tokens; 0 for NULL.
///
/// # Safety
/// `tokens` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simpeval_tokens_len(tokens: *const SimpevalTokens) -> usize {
    tokens.as_ref().map_or(0, |t| t.seq.len())
}

/// Surface form of token `index`, or NULL when out of range. Owned by the handle.
///
/// # Safety
/// `tokens` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simpeval_tokens_surface(tokens: *const SimpevalTokens, index: usize) -> *const c_char {
    tokens.as_ref().and_then(|t| t.surfaces.get(index)).map_or(ptr::null(), |s| s.as_ptr())
}

/// Lowercased form of token `index`, or NULL when out of range. Owned by the handle.
///
/// # Safety
/// `tokens` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simpeval_tokens_normalized(tokens: *const SimpevalTokens, index: usize) -> *const c_char {
    tokens.as_ref().and_then(|t| t.normalized.get(index)).map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `tokens` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simpeval_tokens_is_punctuation(tokens: *const SimpevalTokens, index: usize) -> bool {
    tokens.as_ref().and_then(|t| t.seq.tokens().get(index)).is_some_and(|t| t.is_punctuation)
}

/// Bag-of-words entropy in bits.
///
/// # Safety
/// `tokens` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_bow_entropy(tokens: *const SimpevalTokens, out: *mut f64) -> SimpevalStatus {
    guard(|| write(out, entropy::bow_entropy(&tokens_ref(tokens, "tokens")?.seq)))
}

/// Match-length entropy estimate; needs at least two tokens.
///
/// # Safety
/// `tokens` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_sup_entropy(tokens: *const SimpevalTokens, base: SimpevalLogBase, out: *mut f64) -> SimpevalStatus {
    guard(|| {
        let seq = &tokens_ref(tokens, "tokens")?.seq;
        let base = match base {
            SimpevalLogBase::Two => LogBase::Base2,
            SimpevalLogBase::Natural => LogBase::Natural,
        };
        let profile = entropy::sup_match_lengths_indexed(seq)?;
        write(out, entropy::sup_entropy(&profile, base)?)
    })
}

/// Document BLEU with uniform weights up to `max_order`, no smoothing.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_bleu(
    hypothesis: *const SimpevalTokens,
    reference: *const SimpevalTokens,
    max_order: usize,
    out: *mut SimpevalBleu,
) -> SimpevalStatus {
    guard(|| {
        let config = BleuConfig { max_order, ..Default::default() };
        let s = ngram::bleu(&tokens_ref(hypothesis, "hypothesis")?.seq, &tokens_ref(reference, "reference")?.seq, &config)?;
        write(
            out,
            SimpevalBleu {
                score: s.score,
                brevity_penalty: s.brevity_penalty,
                hypothesis_len: s.hypothesis_len,
                reference_len: s.reference_len,
                degenerate: s.degenerate,
            },
        )
    })
}

/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_rouge_l(
    hypothesis: *const SimpevalTokens,
    reference: *const SimpevalTokens,
    out: *mut SimpevalPrf,
) -> SimpevalStatus {
    guard(|| {
        let r = ngram::rouge_l(&tokens_ref(hypothesis, "hypothesis")?.seq, &tokens_ref(reference, "reference")?.seq);
        write(out, SimpevalPrf { precision: r.precision, recall: r.recall, f1: r.f1 })
    })
}

/// Greedy cosine matching over row-major embedding matrices of shape
/// `rows x dimension`.
///
/// # Safety
/// `hypothesis` and `reference` must point to `rows * dimension` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_greedy_match(
    hypothesis: *const f64,
    hypothesis_rows: usize,
    reference: *const f64,
    reference_rows: usize,
    dimension: usize,
    out: *mut SimpevalPrf,
) -> SimpevalStatus {
    guard(|| {
        let h = matrix(hypothesis, hypothesis_rows, dimension, "hypothesis")?;
        let r = matrix(reference, reference_rows, dimension, "reference")?;
        let s = greedy_match_score(&h, &r)?;
        write(out, SimpevalPrf { precision: s.precision, recall: s.recall, f1: s.f1 })
    })
}

/// Share of the output that is an in-order copy of the source (LCS over output length).
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_copy_rate(output: *const SimpevalTokens, source: *const SimpevalTokens, out: *mut f64) -> SimpevalStatus {
    guard(|| write(out, diagnostics::copy_rate(&tokens_ref(output, "output")?.seq, &tokens_ref(source, "source")?.seq)?))
}

/// Share of `n`-grams that occurred earlier in the same output.
///
/// # Safety
/// `tokens` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_repeated_ngram_rate(tokens: *const SimpevalTokens, n: usize, out: *mut f64) -> SimpevalStatus {
    guard(|| write(out, diagnostics::repeated_ngram_rate(&tokens_ref(tokens, "tokens")?.seq, n)?))
}

/// Best and stopping epoch over per-epoch scores. `patience == 0` disables
/// early stopping.
///
/// # Safety
/// `scores` must point to `len` doubles; `best_epoch` and `stop_epoch` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simpeval_early_stop(
    scores: *const f64,
    len: usize,
    max_epochs: usize,
    patience: usize,
    best_epoch: *mut usize,
    stop_epoch: *mut usize,
) -> SimpevalStatus {
    guard(|| {
        if scores.is_null() && len > 0 {
            return Err(Failure::null("scores"));
        }
        let scores = if len == 0 { &[][..] } else { std::slice::from_raw_parts(scores, len) };
        let policy = EarlyStopPolicy { max_epochs, patience: (patience > 0).then_some(patience) };
        let outcome = early_stop_select(scores, &policy).map_err(|e| {
            let status = if len == 0 { SimpevalStatus::EmptyInput } else { SimpevalStatus::InvalidArgument };
            Failure(status, e.to_string())
        })?;
        if best_epoch.is_null() || stop_epoch.is_null() {
            return Err(Failure::null("output pointer"));
        }
        best_epoch.write(outcome.best_epoch);
        stop_epoch.write(outcome.stop_epoch);
        Ok(())
    })
}
