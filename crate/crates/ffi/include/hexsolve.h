#ifndef HEXSOLVE_H
#define HEXSOLVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HexStatus {
  HEX_STATUS_OK = 0,
  HEX_STATUS_NULL_POINTER = 1,
  HEX_STATUS_INVALID_UTF8 = 2,
  HEX_STATUS_PARSE_ERROR = 3,
  HEX_STATUS_LINK_ERROR = 4,
  HEX_STATUS_UNSAFE_PROGRAM = 5,
  HEX_STATUS_GROUNDING_ERROR = 6,
  HEX_STATUS_SOLVE_ERROR = 7,
  HEX_STATUS_IO_ERROR = 8,
  HEX_STATUS_PANIC = 9,
} HexStatus;

typedef enum HexSafetyMode {
  HEX_SAFETY_MODE_LIBERAL = 0,
  HEX_SAFETY_MODE_STRONG = 1,
  HEX_SAFETY_MODE_DISABLED = 2,
} HexSafetyMode;

/**
 * Answer sets of one `hex_solve` call, each rendered as `{a, b(c)}`.
 */
typedef struct HexResult HexResult;

/**
 * Solver configuration with the builtin external sources.
 */
typedef struct HexSolver HexSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a solver with liberal safety and minimized io-learning.
 */
struct HexSolver *hex_solver_new(void);

/**
 * # Safety
 * `solver` must be null or a pointer from [`hex_solver_new`] not yet freed.
 */
void hex_solver_free(struct HexSolver *solver);

/**
 * # Safety
 * `solver` must be null or a live solver handle.
 */
enum HexStatus hex_solver_set_safety(struct HexSolver *solver, enum HexSafetyMode mode);

/**
 * Turns io-nogood learning and nogood minimization on or off.
 *
 * # Safety
 * `solver` must be null or a live solver handle.
 */
enum HexStatus hex_solver_set_learning(struct HexSolver *solver, bool io_learning, bool minimize);

/**
 * Solves `program`, storing at most `max_answer_sets` answer sets (0: all)
 * in a new result written to `*out`. On error `*out` is set to null.
 *
 * # Safety
 * `solver` must be a live solver handle, `program` a NUL-terminated string
 * and `out` a writable pointer.
 */
enum HexStatus hex_solve(const struct HexSolver *solver,
                         const char *program,
                         size_t max_answer_sets,
                         struct HexResult **out);

/**
 * Number of answer sets in `result`; 0 for null.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
size_t hex_result_count(const struct HexResult *result);

/**
 * The `index`-th answer set, or null when out of range. The string is
 * owned by `result`.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
const char *hex_result_answer_set(const struct HexResult *result, size_t index);

/**
 * # Safety
 * `result` must be null or a pointer from [`hex_solve`] not yet freed.
 */
void hex_result_free(struct HexResult *result);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *hex_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEXSOLVE_H */
