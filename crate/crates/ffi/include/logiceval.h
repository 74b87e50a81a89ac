#ifndef LOGICEVAL_H
#define LOGICEVAL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum LeStatus {
  LE_STATUS_OK = 0,
  LE_STATUS_NULL_POINTER = 1,
  LE_STATUS_INVALID_UTF8 = 2,
  LE_STATUS_PARSE_ERROR = 3,
  LE_STATUS_INVALID_ARGUMENT = 4,
  LE_STATUS_INTERNAL = 5,
} LeStatus;

typedef enum LeEntailment {
  LE_ENTAILMENT_VALID = 0,
  LE_ENTAILMENT_INVALID = 1,
  LE_ENTAILMENT_UNKNOWN = 2,
} LeEntailment;

typedef enum LeAnswer {
  // No marker in the text.
  LE_ANSWER_NONE = 0,
  LE_ANSWER_PROVED = 1,
  LE_ANSWER_DISPROVED = 2,
  LE_ANSWER_UNKNOWN = 3,
} LeAnswer;

typedef enum LeDialect {
  LE_DIALECT_SYMBOLIC = 0,
  LE_DIALECT_NATURAL = 1,
} LeDialect;

typedef enum LeCssReading {
  LE_CSS_READING_SUFFIX = 0,
  LE_CSS_READING_LOCAL = 1,
} LeCssReading;

// Opaque parsed proof chain.
typedef struct LeChain LeChain;

// Opaque parsed formula.
typedef struct LeFormula LeFormula;

// Search limits. `time_limit_ms == 0` disables the wall-clock cap.
typedef struct LeBudget {
  uint32_t max_depth;
  uint64_t max_nodes;
  uint64_t time_limit_ms;
} LeBudget;

typedef struct LeRewardInputs {
  double r_acc;
  double r_valid;
  double r_relevant;
  double r_atomic;
  double r_css;
  // When false, `r_css` is ignored and counts as 0.
  bool has_css;
} LeRewardInputs;

typedef struct LeRewardWeights {
  double w_v;
  double w_r;
  double w_a;
  double w_c;
} LeRewardWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or "" if none. The pointer
// stays valid until the next failing call on the same thread.
const char *le_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void le_string_free(char *s);

// Library version as a static string.
const char *le_version(void);

// Parses formula text (unicode or ASCII operators).
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum LeStatus le_formula_parse(const char *text_ptr, struct LeFormula **out_formula);

// Canonical text of a formula; free the result with `le_string_free`.
//
// # Safety
// `formula` must be a live handle; `out` must be writable.
enum LeStatus le_formula_print(const struct LeFormula *formula, char **out_text);

// # Safety
// `formula` must come from `le_formula_parse` and not be freed twice.
void le_formula_free(struct LeFormula *formula);

// Decides whether the premises entail the conclusion. `min_rule_count` is
// set to the derivation length for valid verdicts and -1 otherwise.
//
// # Safety
// `premises` must point to `n_premises` live handles; the other pointers
// must be valid.
enum LeStatus le_entails(const struct LeFormula *const *premises,
                         uintptr_t n_premises,
                         const struct LeFormula *conclusion,
                         struct LeBudget budget,
                         enum LeEntailment *out_status,
                         int64_t *out_min_rule_count);

// The default search budget.
struct LeBudget le_default_budget(void);

// Last answer marker in the text.
//
// # Safety
// `text` must be nul-terminated; `out` must be writable.
enum LeStatus le_extract_answer(const char *text_ptr, enum LeAnswer *out_answer);

// Text after the last occurrence of `tag`; free the result with
// `le_string_free`.
//
// # Safety
// Both strings must be nul-terminated; `out` must be writable.
enum LeStatus le_strip_preamble(const char *text_ptr, const char *tag, char **out_text);

// Parses a stepwise solution. Never fails on content: malformed chains are
// flagged inside the JSON form.
//
// # Safety
// `text` must be nul-terminated; `out` must be writable.
enum LeStatus le_chain_parse(const char *text_ptr,
                             enum LeDialect dialect,
                             struct LeChain **out_chain);

// Number of steps in a chain.
//
// # Safety
// `chain` must be a live handle; `out` must be writable.
enum LeStatus le_chain_len(const struct LeChain *chain, uintptr_t *out_len);

// One-line JSON form of a chain; free the result with `le_string_free`.
//
// # Safety
// `chain` must be a live handle; `out` must be writable.
enum LeStatus le_chain_to_json(const struct LeChain *chain, char **out_json);

// # Safety
// `chain` must come from `le_chain_parse` and not be freed twice.
void le_chain_free(struct LeChain *chain);

// Weighted reward total.
//
// # Safety
// All pointers must be valid.
enum LeStatus le_compute_reward(const struct LeRewardInputs *inputs,
                                const struct LeRewardWeights *weights,
                                double *out_total);

// ½(TPR + TNR) with `true` as the positive class.
//
// # Safety
// `predictions` and `labels` must each hold `n` values.
enum LeStatus le_balanced_accuracy(const bool *predictions,
                                   const bool *labels,
                                   uintptr_t n,
                                   double *out_score);

// Mean span over traces packed back to back: trace `i` has `lengths[i]`
// entries of `correct`.
//
// # Safety
// `lengths` must hold `n_traces` values and `correct` their sum.
enum LeStatus le_css_score(const bool *correct,
                           const uintptr_t *lengths,
                           uintptr_t n_traces,
                           enum LeCssReading reading,
                           double *out_score);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGICEVAL_H */
