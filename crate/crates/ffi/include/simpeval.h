#ifndef SIMPEVAL_H
#define SIMPEVAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SimpevalLogBase {
  SIMPEVAL_LOG_BASE_TWO = 0,
  SIMPEVAL_LOG_BASE_NATURAL = 1,
} SimpevalLogBase;

typedef enum SimpevalStatus {
  SIMPEVAL_STATUS_OK = 0,
  SIMPEVAL_STATUS_NULL_POINTER = 1,
  SIMPEVAL_STATUS_INVALID_UTF8 = 2,
  SIMPEVAL_STATUS_INVALID_ARGUMENT = 3,
  SIMPEVAL_STATUS_SEQUENCE_TOO_SHORT = 4,
  SIMPEVAL_STATUS_EMPTY_INPUT = 5,
  SIMPEVAL_STATUS_DIMENSION_MISMATCH = 6,
  SIMPEVAL_STATUS_ZERO_VECTOR = 7,
  SIMPEVAL_STATUS_PANIC = 99,
} SimpevalStatus;

/**
 * Opaque tokenized text.
 */
typedef struct SimpevalTokens SimpevalTokens;

typedef struct SimpevalBleu {
  /**
   * 0..100
   */
  double score;
  double brevity_penalty;
  size_t hypothesis_len;
  size_t reference_len;
  /**
   * Set when the hypothesis is empty.
   */
  bool degenerate;
} SimpevalBleu;

/**
 * Precision, recall and F1 of one comparison.
 */
typedef struct SimpevalPrf {
  double precision;
  double recall;
  double f1;
} SimpevalPrf;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *simpeval_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *simpeval_version(void);

/**
 * Tokenizes NUL-terminated UTF-8 `text`. Free the result with
 * [`simpeval_tokens_free`].
 *
 * # Safety
 * `text` must be NULL or a valid NUL-terminated string; `out` must be NULL
 * or writable.
 */
enum SimpevalStatus simpeval_tokenize(const char *text, struct SimpevalTokens **out);

/**
 * # Safety
 * `tokens` must be NULL or a handle from [`simpeval_tokenize`] not yet freed.
 */
void simpeval_tokens_free(struct SimpevalTokens *tokens);

/**
 * Number of tokens; 0 for NULL.
 *
 * # Safety
 * `tokens` must be NULL or a live handle.
 */
size_t simpeval_tokens_len(const struct SimpevalTokens *tokens);

/**
 * Surface form of token `index`, or NULL when out of range. Owned by the handle.
 *
 * # Safety
 * `tokens` must be NULL or a live handle.
 */
const char *simpeval_tokens_surface(const struct SimpevalTokens *tokens, size_t index);

/**
 * Lowercased form of token `index`, or NULL when out of range. Owned by the handle.
 *
 * # Safety
 * `tokens` must be NULL or a live handle.
 */
const char *simpeval_tokens_normalized(const struct SimpevalTokens *tokens, size_t index);

/**
 * # Safety
 * `tokens` must be NULL or a live handle.
 */
bool simpeval_tokens_is_punctuation(const struct SimpevalTokens *tokens, size_t index);

/**
 * Bag-of-words entropy in bits.
 *
 * # Safety
 * `tokens` must be a live handle and `out` writable.
 */
enum SimpevalStatus simpeval_bow_entropy(const struct SimpevalTokens *tokens, double *out);

/**
 * Match-length entropy estimate; needs at least two tokens.
 *
 * # Safety
 * `tokens` must be a live handle and `out` writable.
 */
enum SimpevalStatus simpeval_sup_entropy(const struct SimpevalTokens *tokens,
                                         enum SimpevalLogBase base,
                                         double *out);

/**
 * Document BLEU with uniform weights up to `max_order`, no smoothing.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum SimpevalStatus simpeval_bleu(const struct SimpevalTokens *hypothesis,
                                  const struct SimpevalTokens *reference,
                                  size_t max_order,
                                  struct SimpevalBleu *out);

/**
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum SimpevalStatus simpeval_rouge_l(const struct SimpevalTokens *hypothesis,
                                     const struct SimpevalTokens *reference,
                                     struct SimpevalPrf *out);

/**
 * Greedy cosine matching over row-major embedding matrices of shape
 * `rows x dimension`.
 *
 * # Safety
 * `hypothesis` and `reference` must point to `rows * dimension` doubles;
 * `out` must be writable.
 */
enum SimpevalStatus simpeval_greedy_match(const double *hypothesis,
                                          size_t hypothesis_rows,
                                          const double *reference,
                                          size_t reference_rows,
                                          size_t dimension,
                                          struct SimpevalPrf *out);

/**
 * Share of the output that is an in-order copy of the source (LCS over output length).
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum SimpevalStatus simpeval_copy_rate(const struct SimpevalTokens *output,
                                       const struct SimpevalTokens *source,
                                       double *out);

/**
 * Share of `n`-grams that occurred earlier in the same output.
 *
 * # Safety
 * `tokens` must be a live handle and `out` writable.
 */
enum SimpevalStatus simpeval_repeated_ngram_rate(const struct SimpevalTokens *tokens,
                                                 size_t n,
                                                 double *out);

/**
 * Best and stopping epoch over per-epoch scores. `patience == 0` disables
 * early stopping.
 *
 * # Safety
 * `scores` must point to `len` doubles; `best_epoch` and `stop_epoch` must be writable.
 */
enum SimpevalStatus simpeval_early_stop(const double *scores,
                                        size_t len,
                                        size_t max_epochs,
                                        size_t patience,
                                        size_t *best_epoch,
                                        size_t *stop_epoch);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMPEVAL_H */
