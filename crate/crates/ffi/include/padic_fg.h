#ifndef PADIC_FG_H
#define PADIC_FG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Arithmetic operations for [`pfg_scalar_op`].
 */
typedef enum PfgOp {
  PFG_OP_ADD = 0,
  PFG_OP_SUB = 1,
  PFG_OP_MUL = 2,
  PFG_OP_DIV = 3,
} PfgOp;

/*
 Result codes.
 */
typedef enum PfgStatus {
  PFG_STATUS_OK = 0,
  /*
   Malformed arguments or unsupported parameters.
   */
  PFG_STATUS_INVALID_INPUT = 1,
  /*
   A certified computation did not reach the asserted property.
   */
  PFG_STATUS_CHECK_FAILED = 2,
  /*
   A required pointer argument was null.
   */
  PFG_STATUS_NULL_POINTER = 3,
  /*
   A string argument was not valid UTF-8.
   */
  PFG_STATUS_INVALID_UTF8 = 4,
  /*
   The library panicked; the handle arguments are left untouched.
   */
  PFG_STATUS_INTERNAL = 5,
} PfgStatus;

/*
 A counterexample construction run.
 */
typedef struct PfgCounterexample PfgCounterexample;

/*
 A p-adic number with its certified absolute precision.
 */
typedef struct PfgScalar PfgScalar;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer stays
 valid until the next call into the library from the same thread.
 */
const char *pfg_last_error(void);

/*
 Library version as a static string.
 */
const char *pfg_version(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void pfg_string_free(char *s);

/*
 Parses the decimal integer `value` as an element of `Z_p` known modulo `p^prec`.

 # Safety
 `value` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PfgStatus pfg_scalar_new(uint64_t p, const char *value, int64_t prec, struct PfgScalar **out);

/*
 Releases a scalar. Null is ignored.

 # Safety
 `x` must come from this library and not have been freed.
 */
void pfg_scalar_free(struct PfgScalar *x);

/*
 `*out = a op b` with precision propagated from both operands.

 # Safety
 `a` and `b` must be live scalar handles and `out` a writable pointer.
 */
enum PfgStatus pfg_scalar_op(enum PfgOp op,
                             const struct PfgScalar *a,
                             const struct PfgScalar *b,
                             struct PfgScalar **out);

/*
 Writes `v_p(x)` to `out_v` and `false` to `out_zero`, or `true` to
 `out_zero` when `x` vanishes to its precision (then `out_v` holds the precision).

 # Safety
 `x` must be a live scalar handle; outputs must be writable.
 */
enum PfgStatus pfg_scalar_valuation(const struct PfgScalar *x, int64_t *out_v, bool *out_zero);

/*
 Certified absolute precision of `x`, or -1 for a null handle.

 # Safety
 `x` must be null or a live scalar handle.
 */
int64_t pfg_scalar_precision(const struct PfgScalar *x);

/*
 `x` as the JSON record `{"v", "unit", "prec"}`.

 # Safety
 `x` must be a live scalar handle and `out` a writable pointer.
 */
enum PfgStatus pfg_scalar_to_json(const struct PfgScalar *x, char **out);

/*
 Runs the construction on `G_m` over `Z_p` with `alpha_1 = alpha_2 = alpha`
 (a decimal integer of positive valuation) for `stages` stages at output
 precision `n_out`.

 # Safety
 `alpha` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PfgStatus pfg_cex_build(uint64_t p,
                             const char *alpha,
                             int64_t n_out,
                             uint32_t stages,
                             struct PfgCounterexample **out);

/*
 Releases a construction handle. Null is ignored.

 # Safety
 `h` must come from this library and not have been freed.
 */
void pfg_cex_free(struct PfgCounterexample *h);

/*
 Number of completed stages, or 0 for a null handle.

 # Safety
 `h` must be null or a live handle.
 */
uint32_t pfg_cex_stage(const struct PfgCounterexample *h);

/*
 Full state dump as JSON, readable by `padic-fg cex verify`.

 # Safety
 `h` must be a live handle and `out` a writable pointer.
 */
enum PfgStatus pfg_cex_to_json(const struct PfgCounterexample *h, char **out);

/*
 Re-verifies every interpolation condition to precision `n_out` and writes
 the report as JSON. Returns `PFG_STATUS_CHECK_FAILED` when a residual is
 too large; `out` is then left untouched.

 # Safety
 `h` must be a live handle and `out` a writable pointer.
 */
enum PfgStatus pfg_cex_verify(const struct PfgCounterexample *h, int64_t n_out, char **out);

/*
 Runs one command-line invocation (without the program name), e.g.
 `{"newton", "polygon", "--p", "3", "--alpha-val", "1"}`, and writes its
 JSON document to `out`. A document whose checks failed is still written
 and the call returns `PFG_STATUS_CHECK_FAILED`.

 # Safety
 `argv` must point to `argc` NUL-terminated strings and `out` be writable.
 */
enum PfgStatus pfg_run_json(size_t argc, const char *const *argv, char **out);

/*
 Newton polygon of `[p](X) - alpha` on `G_m` for `v(alpha) = alpha_val`
 (an exact rational such as `"3/2"`), iterated `steps` times.

 # Safety
 `alpha_val` must be a NUL-terminated string and `out` writable.
 */
enum PfgStatus pfg_newton_json(uint64_t p, const char *alpha_val, uint32_t steps, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PADIC_FG_H */
