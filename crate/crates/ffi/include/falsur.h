#ifndef FALSUR_H
#define FALSUR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FalsurStatus {
  FALSUR_STATUS_OK = 0,
  FALSUR_STATUS_NULL_ARGUMENT = 1,
  FALSUR_STATUS_INVALID_UTF8 = 2,
  // Unknown id, bad budget or structure.
  FALSUR_STATUS_CONFIG = 3,
  // Malformed requirement text.
  FALSUR_STATUS_SYNTAX = 4,
  // Shape mismatch between signals, formulas and models.
  FALSUR_STATUS_STRUCTURAL = 5,
  // The model failed while running.
  FALSUR_STATUS_RUNTIME = 6,
  FALSUR_STATUS_IO = 7,
  FALSUR_STATUS_PANIC = 8,
} FalsurStatus;

typedef struct FalsurAristeoReport FalsurAristeoReport;

typedef struct FalsurBaselineResult FalsurBaselineResult;

typedef struct FalsurBenchmark FalsurBenchmark;

typedef struct FalsurFormula FalsurFormula;

typedef struct FalsurTrace FalsurTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *falsur_last_error(void);

// # Safety
// `s` must come from this library and not have been freed.
void falsur_string_free(char *s);

// # Safety
// `id` must be a NUL-terminated string; `out` must be writable.
enum FalsurStatus falsur_benchmark_open(const char *id, struct FalsurBenchmark **out);

// Number of control-point values that make up one test input.
//
// # Safety
// `b` must be a live handle; `out` must be writable.
enum FalsurStatus falsur_benchmark_dimension(const struct FalsurBenchmark *b, size_t *out);

// # Safety
// `b` must be null or a live handle.
void falsur_benchmark_free(struct FalsurBenchmark *b);

// Parses `text` against the `n` channel names in `channels`.
//
// # Safety
// `text` and each of the `n` entries of `channels` must be NUL-terminated
// strings; `out` must be writable.
enum FalsurStatus falsur_formula_parse(const char *text,
                                       const char *const *channels,
                                       size_t n,
                                       struct FalsurFormula **out);

// # Safety
// `f` must be null or a live handle.
void falsur_formula_free(struct FalsurFormula *f);

// A trace on `[0, end]` sampled every `step`. `values` holds `len` samples
// per channel, channel after channel; `len` must equal the number of grid
// points.
//
// # Safety
// `names` must hold `channels` NUL-terminated strings and `values` must
// hold `channels * len` doubles; `out` must be writable.
enum FalsurStatus falsur_trace_new(double end,
                                   double step,
                                   const char *const *names,
                                   size_t channels,
                                   const double *values,
                                   size_t len,
                                   struct FalsurTrace **out);

// # Safety
// `t` must be null or a live handle.
void falsur_trace_free(struct FalsurTrace *t);

// Robustness of `f` on `t` at time `t0`.
//
// # Safety
// `f` and `t` must be live handles; `out` must be writable.
enum FalsurStatus falsur_robustness(const struct FalsurFormula *f,
                                    const struct FalsurTrace *t,
                                    double t0,
                                    double *out);

// Baseline falsification. A null `stl` uses the benchmark's requirement;
// `strategy` is `random`, `hill-climb` or `annealing`.
//
// # Safety
// `b` must be a live handle, `stl` null or a NUL-terminated string,
// `strategy` a NUL-terminated string and `out` writable.
enum FalsurStatus falsur_falsify(const struct FalsurBenchmark *b,
                                 const char *stl,
                                 const char *strategy,
                                 size_t max,
                                 uint64_t seed,
                                 struct FalsurBaselineResult **out);

// # Safety
// `r` must be a live handle.
bool falsur_baseline_falsified(const struct FalsurBaselineResult *r);

// # Safety
// `r` must be a live handle.
size_t falsur_baseline_executions(const struct FalsurBaselineResult *r);

// NaN for a null handle.
//
// # Safety
// `r` must be null or a live handle.
double falsur_baseline_best_objective(const struct FalsurBaselineResult *r);

// # Safety
// `r` must be null or a live handle.
void falsur_baseline_free(struct FalsurBaselineResult *r);

// Surrogate-assisted falsification. `structure` is `arx`, `armax`, `bj`
// or `ss` with `n_orders` orders; `strategy` drives the search on the
// surrogate; `max` is the per-iteration surrogate budget and `max_ref`
// the iteration cap.
//
// # Safety
// `b` must be a live handle, `stl` null or a NUL-terminated string,
// `strategy` and `structure` NUL-terminated strings, `orders` must hold `n_orders`
// values and `out` must be writable.
enum FalsurStatus falsur_aristeo(const struct FalsurBenchmark *b,
                                 const char *stl,
                                 const char *strategy,
                                 const char *structure,
                                 const size_t *orders,
                                 size_t n_orders,
                                 size_t max,
                                 size_t max_ref,
                                 uint64_t seed,
                                 struct FalsurAristeoReport **out);

// # Safety
// `r` must be null or a live handle.
bool falsur_aristeo_falsified(const struct FalsurAristeoReport *r);

// # Safety
// `r` must be null or a live handle.
size_t falsur_aristeo_mut_executions(const struct FalsurAristeoReport *r);

// # Safety
// `r` must be null or a live handle.
size_t falsur_aristeo_refinements(const struct FalsurAristeoReport *r);

// # Safety
// `r` must be null or a live handle.
double falsur_aristeo_best_objective(const struct FalsurAristeoReport *r);

// The full report as JSON; release with [`falsur_string_free`].
//
// # Safety
// `r` must be a live handle; `out` must be writable.
enum FalsurStatus falsur_aristeo_to_json(const struct FalsurAristeoReport *r, char **out);

// # Safety
// `r` must be null or a live handle.
void falsur_aristeo_free(struct FalsurAristeoReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FALSUR_H */
