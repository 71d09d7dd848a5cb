#ifndef FL_FFI_H
#define FL_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_POINTER = 1,
  FL_STATUS_INVALID_UTF8 = 2,
  FL_STATUS_PARSE = 3,
  FL_STATUS_NO_VIOLATION = 4,
  FL_STATUS_NO_DIAGNOSIS = 5,
  FL_STATUS_INVALID_ARGUMENT = 6,
  FL_STATUS_INVALID_ANSWER = 7,
  FL_STATUS_SESSION_FINISHED = 8,
  FL_STATUS_BUFFER_TOO_SMALL = 9,
  FL_STATUS_INTERNAL = 10,
} FlStatus;

/**
 * A parsed knowledge base.
 */
typedef struct FlKb FlKb;

/**
 * An interactive session.
 */
typedef struct FlSession FlSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *fl_last_error_message(void);

/**
 * Parses KB text. On success `*out` owns a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FlStatus fl_kb_parse(const char *text, struct FlKb **out);

/**
 * Number of possibly faulty axioms.
 *
 * # Safety
 * `kb` must come from [`fl_kb_parse`]; `out` must be valid.
 */
enum FlStatus fl_kb_num_axioms(const struct FlKb *kb, size_t *out);

/**
 * # Safety
 * `kb` must come from [`fl_kb_parse`] or be null.
 */
void fl_kb_free(struct FlKb *kb);

/**
 * Starts a session on a copy of `kb`. `heuristic` is one of ENT, SPL, RIO,
 * RND, BME, KL, EMCb.
 *
 * # Safety
 * `kb` must be a live handle, `heuristic` NUL-terminated, `out` valid.
 */
enum FlStatus fl_session_new(const struct FlKb *kb,
                             const char *heuristic,
                             bool singleton,
                             uint64_t seed,
                             struct FlSession **out);

/**
 * # Safety
 * `s` must come from [`fl_session_new`] or be null.
 */
void fl_session_free(struct FlSession *s);

/**
 * Whether the session still awaits an answer.
 *
 * # Safety
 * `s` must be a live handle and `out` valid.
 */
enum FlStatus fl_session_is_running(const struct FlSession *s, bool *out);

/**
 * Number of answered queries.
 *
 * # Safety
 * `s` must be a live handle and `out` valid.
 */
enum FlStatus fl_session_step_count(const struct FlSession *s, size_t *out);

/**
 * Number of diagnoses still considered.
 *
 * # Safety
 * `s` must be a live handle and `out` valid.
 */
enum FlStatus fl_session_remaining(const struct FlSession *s, size_t *out);

/**
 * Axiom ids of the current query. Returns `BufferTooSmall` with `*len` set
 * when `cap` is too small; `*len` is 0 once the session is finished.
 *
 * # Safety
 * `s` must be a live handle, `buf` must hold `cap` values, `len` valid.
 */
enum FlStatus fl_session_query(const struct FlSession *s, uint32_t *buf, size_t cap, size_t *len);

/**
 * Answers the current query as a whole: `yes` means every axiom holds.
 *
 * # Safety
 * `s` must be a live handle.
 */
enum FlStatus fl_session_answer_whole(struct FlSession *s, bool yes);

/**
 * Labels some axioms of the current query; `labels[i]` nonzero means `ids[i]`
 * holds. Some label must be zero unless every query axiom is labelled.
 *
 * # Safety
 * `s` must be a live handle; `ids` and `labels` must hold `n` values.
 */
enum FlStatus fl_session_answer_axioms(struct FlSession *s,
                                       const uint32_t *ids,
                                       const uint8_t *labels,
                                       size_t n);

/**
 * Runs the session to the end with a simulated expert of type `expert`
 * (query-based, minimalist, pragmatist, maximalist) answering by the
 * actual diagnosis `truth`.
 *
 * # Safety
 * `s` must be a live handle, `truth` must hold `n` ids, `expert` NUL-terminated.
 */
enum FlStatus fl_session_run_simulated(struct FlSession *s,
                                       const uint32_t *truth,
                                       size_t n,
                                       const char *expert);

/**
 * Axiom ids of the final diagnosis. `InvalidArgument` while running.
 *
 * # Safety
 * `s` must be a live handle, `buf` must hold `cap` values, `len` valid.
 */
enum FlStatus fl_session_final_diagnosis(const struct FlSession *s,
                                         uint32_t *buf,
                                         size_t cap,
                                         size_t *len);

/**
 * The session log as JSON lines. Release with [`fl_string_free`].
 *
 * # Safety
 * `s` must be a live handle and `out` valid.
 */
enum FlStatus fl_session_log_jsonl(const struct FlSession *s, char **out);

/**
 * # Safety
 * `p` must come from this library or be null.
 */
void fl_string_free(char *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FL_FFI_H */
