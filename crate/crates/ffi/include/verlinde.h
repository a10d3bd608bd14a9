#ifndef VERLINDE_H
#define VERLINDE_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VerlindeStatus {
  VERLINDE_STATUS_OK = 0,
  VERLINDE_STATUS_NULL_POINTER = 1,
  VERLINDE_STATUS_INVALID_UTF8 = 2,
  VERLINDE_STATUS_PARSE = 3,
  VERLINDE_STATUS_INADMISSIBLE = 4,
  VERLINDE_STATUS_NON_INTEGRAL = 5,
  VERLINDE_STATUS_OVERFLOW = 6,
  VERLINDE_STATUS_FAILED = 7,
  VERLINDE_STATUS_PANIC = 8,
} VerlindeStatus;

typedef enum VerlindeMode {
  /**
   * Pick from the group: quotient formula for nontrivial subgroups.
   */
  VERLINDE_MODE_AUTO = 0,
  VERLINDE_MODE_SC = 1,
  VERLINDE_MODE_NS = 2,
  VERLINDE_MODE_CONJCLASS = 3,
  VERLINDE_MODE_CLOSED = 4,
} VerlindeMode;

typedef enum VerlindeRule {
  VERLINDE_RULE_STRICT = 0,
  VERLINDE_RULE_WEAK = 1,
  VERLINDE_RULE_UNCHECKED = 2,
} VerlindeRule;

/**
 * Opaque query handle.
 */
typedef struct VerlindeQuery VerlindeQuery;

/**
 * Opaque result handle.
 */
typedef struct VerlindeResult VerlindeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *verlinde_last_error(void);

/**
 * Library version as a static string.
 */
const char *verlinde_version(void);

/**
 * Creates a query for `group` (e.g. "SO(3)", "E7'") at the given levels
 * (one, or one per simple factor) and genus.
 *
 * # Safety
 * `group` must be a nul-terminated string, `levels` must point to
 * `n_levels` values, and `out` must be writable.
 */
enum VerlindeStatus verlinde_query_new(const char *group,
                                       const uint32_t *levels,
                                       size_t n_levels,
                                       uint32_t genus,
                                       struct VerlindeQuery **out);

/**
 * # Safety
 * `q` must come from [`verlinde_query_new`] and not be used afterwards.
 */
void verlinde_query_free(struct VerlindeQuery *q);

/**
 * # Safety
 * `q` must be a live query handle.
 */
enum VerlindeStatus verlinde_query_set_mode(struct VerlindeQuery *q, enum VerlindeMode mode);

/**
 * # Safety
 * `q` must be a live query handle.
 */
enum VerlindeStatus verlinde_query_set_rule(struct VerlindeQuery *q, enum VerlindeRule rule);

/**
 * Appends a marking given in fundamental-weight coordinates.
 *
 * # Safety
 * `q` must be a live query handle and `coords` must point to `len` values.
 */
enum VerlindeStatus verlinde_query_add_marking(struct VerlindeQuery *q,
                                               const int64_t *coords,
                                               size_t len);

/**
 * Replaces the central subgroup with the one generated by `gens`, written
 * as in the command line (`"1,1"`, `"1,0;0,1"`).
 *
 * # Safety
 * `q` must be a live query handle and `gens` a nul-terminated string.
 */
enum VerlindeStatus verlinde_query_set_center(struct VerlindeQuery *q, const char *gens);

/**
 * Sets the character of `Gamma^{2h}`: `rows` slots of `cols` exponents,
 * row-major, one exponent per generator.
 *
 * # Safety
 * `q` must be a live query handle and `exps` must point to `rows * cols` values.
 */
enum VerlindeStatus verlinde_query_set_phi(struct VerlindeQuery *q,
                                           const int64_t *exps,
                                           size_t rows,
                                           size_t cols);

/**
 * Evaluates the query. On success `*out` receives a result handle.
 *
 * # Safety
 * `q` must be a live query handle and `out` writable.
 */
enum VerlindeStatus verlinde_query_compute(const struct VerlindeQuery *q,
                                           struct VerlindeResult **out);

/**
 * # Safety
 * `r` must come from [`verlinde_query_compute`] and not be used afterwards.
 */
void verlinde_result_free(struct VerlindeResult *r);

/**
 * Decimal digits of the index, owned by the result handle.
 *
 * # Safety
 * `r` must be a live result handle.
 */
const char *verlinde_result_value(const struct VerlindeResult *r);

/**
 * The index as a 64-bit integer; `Overflow` if it does not fit.
 *
 * # Safety
 * `r` must be a live result handle and `out` writable.
 */
enum VerlindeStatus verlinde_result_value_i64(const struct VerlindeResult *r, int64_t *out);

/**
 * Number of `lambda` terms in the sum.
 *
 * # Safety
 * `r` must be a live result handle.
 */
size_t verlinde_result_terms(const struct VerlindeResult *r);

/**
 * Full result as JSON; free with [`verlinde_string_free`].
 *
 * # Safety
 * `r` must be a live result handle.
 */
char *verlinde_result_json(const struct VerlindeResult *r);

/**
 * # Safety
 * `s` must come from a `*_json` function of this library.
 */
void verlinde_string_free(char *s);

/**
 * Smallest admissible level of each simple factor of `group` (a quotient
 * name such as "SO(3)" or "E7'"). Writes up to `cap` values to `out` and
 * the factor count to `*n_out`.
 *
 * # Safety
 * `group` must be a nul-terminated string, `out` must hold `cap` values and
 * `n_out` must be writable.
 */
enum VerlindeStatus verlinde_min_levels(const char *group,
                                        enum VerlindeRule rule,
                                        uint32_t *out,
                                        size_t cap,
                                        size_t *n_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VERLINDE_H */
