#ifndef COMPSUM_H
#define COMPSUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_UTF8 = 2,
  CS_STATUS_INVALID_ARGUMENT = 3,
  CS_STATUS_PARSE = 4,
  CS_STATUS_IO = 5,
  CS_STATUS_MODEL = 6,
  CS_STATUS_INTERNAL = 7,
} CsStatus;

/**
 * A loaded model. Opaque to C callers.
 */
typedef struct CsModel CsModel;

typedef struct CsRougeScore {
  double precision;
  double recall;
  double f1;
} CsRougeScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never free it.
 */
const char *cs_version(void);

/**
 * Message of the last failed call on this thread, or null after a
 * successful call. Valid until the next call on the same thread.
 */
const char *cs_last_error(void);

/**
 * Loads a model file. On success `*out` owns the model.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum CsStatus cs_model_load(const char *path, struct CsModel **out);

/**
 * # Safety
 * `model` must be null or a pointer from [`cs_model_load`] not yet freed.
 */
void cs_model_free(struct CsModel *model);

/**
 * Summarizes one document given as a JSON corpus record. `*out_json`
 * receives the summary as JSON; free it with [`cs_string_free`].
 *
 * # Safety
 * `model` must come from [`cs_model_load`]; `doc_json` must be a
 * nul-terminated string; `out_json` must be writable.
 */
enum CsStatus cs_summarize(const struct CsModel *model,
                           const char *doc_json,
                           size_t k,
                           double tau,
                           bool dedup,
                           char **out_json);

/**
 * Compression options of one bracketed parse, as a JSON array.
 *
 * # Safety
 * `parse` must be a nul-terminated string; `out_json` must be writable.
 */
enum CsStatus cs_extract_options(const char *parse, char **out_json);

/**
 * ROUGE of whitespace-tokenized `candidate` against `reference`. `n` is
 * 1 or 2 for ROUGE-N, 0 for ROUGE-L.
 *
 * # Safety
 * Both strings must be nul-terminated; `out` must be writable.
 */
enum CsStatus cs_rouge(const char *candidate,
                       const char *reference,
                       uint32_t n,
                       struct CsRougeScore *out);

/**
 * Mean of ROUGE-1 and ROUGE-2 F1 after lowercasing, stopword removal and
 * stemming, as used to build oracles.
 *
 * # Safety
 * Both strings must be nul-terminated; `out` must be writable.
 */
enum CsStatus cs_approx_score(const char *candidate, const char *reference, double *out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void cs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMPSUM_H */
