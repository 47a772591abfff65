#ifndef MECHKIT_H
#define MECHKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the non-zero library codes match the CLI's exit codes.
typedef enum MkStatus {
  MK_STATUS_OK = 0,
  // Malformed JSON, bad spec strings, out-of-range profiles.
  MK_STATUS_INPUT = 1,
  // The option rule produced a negative cycle (it is not SE or affine).
  MK_STATUS_NEGATIVE_CYCLE = 2,
  // An enumeration exceeded its cap.
  MK_STATUS_CAPACITY = 3,
  // An internal soundness assertion failed.
  MK_STATUS_INVARIANT = 4,
  // A required pointer argument was null.
  MK_STATUS_NULL_POINTER = 5,
  // A string argument was not valid UTF-8.
  MK_STATUS_UTF8 = 6,
  // A Rust panic was caught at the boundary.
  MK_STATUS_PANIC = 7,
} MkStatus;

// Opaque environment handle.
typedef struct MkEnv MkEnv;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a JSON environment document into a new handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable. On
// success `*out` owns a handle to release with [`mk_env_free`].
enum MkStatus mk_env_from_json(const char *json, struct MkEnv **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `env` must be null or a handle from [`mk_env_from_json`] not yet freed.
void mk_env_free(struct MkEnv *env);

// Number of agents, or 0 for a null handle.
//
// # Safety
// `env` must be null or a live handle.
size_t mk_env_agent_count(const struct MkEnv *env);

// Number of types of `agent`, or 0 when the handle is null or the agent
// is out of range.
//
// # Safety
// `env` must be null or a live handle.
size_t mk_env_domain_size(const struct MkEnv *env, size_t agent);

// Runs the mechanism at one profile and writes the outcome JSON
// (`option`, `payments`, `utilities`, `budget`) to `*out`.
//
// `rule` and `payment` use the CLI spec syntax; null selects the
// document's rule (else `se:lowest`) and `proposed`.
//
// # Safety
// `env` must be a live handle; `rule`/`payment` null or NUL-terminated;
// `profile` must point to `len` readable values (may be null when `len`
// is 0); `out` must be writable.
enum MkStatus mk_run(const struct MkEnv *env,
                     const char *rule,
                     const char *payment,
                     const size_t *profile,
                     size_t len,
                     char **out);

// Exhaustively audits SE, DSIC and IR (plus the oracle comparison when
// `oracle` is true) and writes the report JSON to `*out`.
//
// # Safety
// As for [`mk_run`].
enum MkStatus mk_audit(const struct MkEnv *env,
                       const char *rule,
                       const char *payment,
                       bool oracle,
                       char **out);

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next mechkit call on this thread.
const char *mk_last_error(void);

// Releases a string returned through an `out` parameter. Null is ignored.
//
// # Safety
// `s` must be null or a string produced by this library, not yet freed.
void mk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MECHKIT_H */
