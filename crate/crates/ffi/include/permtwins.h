#ifndef PERMTWINS_H
#define PERMTWINS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_NULL_POINTER = 1,
  PT_STATUS_INVALID_ARGUMENT = 2,
  PT_STATUS_PARSE = 3,
  PT_STATUS_INVALID_CERTIFICATE = 4,
  PT_STATUS_BUDGET_EXCEEDED = 5,
  PT_STATUS_BUFFER_TOO_SMALL = 6,
  PT_STATUS_INTERNAL = 7,
  PT_STATUS_PANIC = 8,
} PtStatus;

// Opaque certificate handle: r position lists of common length k.
typedef struct PtCertificate PtCertificate;

// Opaque permutation handle.
typedef struct PtPermutation PtPermutation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Short description of a status code. The string is static; do not free it.
const char *pt_status_message(enum PtStatus status);

// Message of the last failure on this thread, or null. Free with [`pt_string_free`].
char *pt_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void pt_string_free(char *s);

// Copies `len` distinct integers into a new permutation.
//
// # Safety
// `values` must point to `len` readable integers; `out` must be writable.
enum PtStatus pt_permutation_new(const int64_t *values, size_t len, struct PtPermutation **out);

// A uniform random permutation of `1..=n`, determined by `seed`.
//
// # Safety
// `out` must be writable.
enum PtStatus pt_permutation_random(size_t n, uint64_t seed, struct PtPermutation **out);

// # Safety
// `p` must be null or a live handle from this library.
void pt_permutation_free(struct PtPermutation *p);

// Length of `p`, or 0 for null.
//
// # Safety
// `p` must be null or a live handle.
size_t pt_permutation_len(const struct PtPermutation *p);

// Copies the values of `p` into `buf`, which must hold at least `len(p)` entries.
//
// # Safety
// `buf` must point to `buf_len` writable integers.
enum PtStatus pt_permutation_values(const struct PtPermutation *p, int64_t *buf, size_t buf_len);

// Parses `{"r":..,"k":..,"indices":[[..],..]}` (1-based positions) against `host`.
//
// # Safety
// `host` must be a live handle, `json` a NUL-terminated string, `out` writable.
enum PtStatus pt_certificate_from_json(const struct PtPermutation *host,
                                       const char *json,
                                       struct PtCertificate **out);

// Serializes `cert` in the same JSON shape. Free the string with [`pt_string_free`].
//
// # Safety
// `cert` must be a live handle; `out` writable.
enum PtStatus pt_certificate_to_json(const struct PtCertificate *cert, char **out);

// # Safety
// `cert` must be null or a live handle.
void pt_certificate_free(struct PtCertificate *cert);

// Number of lists r, or 0 for null.
//
// # Safety
// `cert` must be null or a live handle.
size_t pt_certificate_multiplicity(const struct PtCertificate *cert);

// Common list length k, or 0 for null.
//
// # Safety
// `cert` must be null or a live handle.
size_t pt_certificate_length(const struct PtCertificate *cert);

// Copies list `list` (0-based positions) into `buf`.
//
// # Safety
// `buf` must point to `buf_len` writable entries.
enum PtStatus pt_certificate_positions(const struct PtCertificate *cert,
                                       size_t list,
                                       size_t *buf,
                                       size_t buf_len);

// Writes whether `cert` is a valid twins certificate for `host`.
//
// # Safety
// Handles must be live; `out` writable.
enum PtStatus pt_verify(const struct PtPermutation *host,
                        const struct PtCertificate *cert,
                        bool *out);

// Deterministic block-and-remove finder.
//
// # Safety
// `host` must be live; `out` writable.
enum PtStatus pt_find_constructive(const struct PtPermutation *host,
                                   size_t r,
                                   struct PtCertificate **out);

// Block-grid matching finder. `a = 0` picks the default block size and
// `cutoff = 0` the default degree cutoff.
//
// # Safety
// `host` must be live; `out` writable.
enum PtStatus pt_find_matching(const struct PtPermutation *host,
                               size_t r,
                               size_t a,
                               size_t cutoff,
                               struct PtCertificate **out);

// r-twins cut from a longest monotone subsequence.
//
// # Safety
// `host` must be live; `out` writable.
enum PtStatus pt_es_twins(const struct PtPermutation *host, size_t r, struct PtCertificate **out);

// A square (multiplicity equal to length) from repeated monotone extraction.
//
// # Safety
// `host` must be live; `out` writable.
enum PtStatus pt_greedy_square(const struct PtPermutation *host, struct PtCertificate **out);

// Exact maximum twin length with a witness. `max_nodes = 0` uses the default
// budget. When `lower_bound` is set, an exhausted budget still yields the
// best certificate found and `exact_out` (if not null) receives false.
//
// # Safety
// `host` must be live; `out` writable; `exact_out` null or writable.
enum PtStatus pt_exact_twins(const struct PtPermutation *host,
                             size_t r,
                             uint64_t max_nodes,
                             bool lower_bound,
                             struct PtCertificate **out,
                             bool *exact_out);

// Natural log of the expected number of r-twins of length k in a random
// permutation of `[n]`; negative infinity when `r * k > n`.
//
// # Safety
// `out` must be writable.
enum PtStatus pt_log_expected_twin_count(size_t n, size_t k, size_t r, double *out);

// The same expectation as an exact fraction `"num/den"`. Free with [`pt_string_free`].
//
// # Safety
// `out` must be writable.
enum PtStatus pt_expected_twin_count(size_t n, size_t k, size_t r, char **out);

// `ceil(2e * n^(r/(2r-1)))`.
uint64_t pt_upper_threshold(size_t n, size_t r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERMTWINS_H */
