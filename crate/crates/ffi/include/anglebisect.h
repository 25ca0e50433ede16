#ifndef ANGLEBISECT_H
#define ANGLEBISECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define AB_PROCEDURE_LARGEST_ANGLE 0

#define AB_PROCEDURE_LONGEST_EDGE 1

#define AB_PROCEDURE_SHORTEST_ALTITUDE 2

typedef enum AbStatus {
  AB_STATUS_OK = 0,
  AB_STATUS_NULL_POINTER = 1,
  AB_STATUS_INVALID_INPUT = 2,
  AB_STATUS_DEGENERATE = 3,
  AB_STATUS_OUT_OF_RANGE = 4,
  AB_STATUS_INTERNAL = 5,
} AbStatus;

// A finished refinement.
typedef struct AbRun AbRun;

// One generation's statistics. `rho` is NaN when `has_rho` is false.
typedef struct AbGenerationStats {
  uint32_t n;
  uint64_t triangle_count;
  double mesh;
  double min_angle_deg;
  double min_largest_angle_deg;
  double max_aspect_ratio;
  double rho;
  bool has_rho;
  uint64_t cumulative_similarity_classes;
} AbGenerationStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Refines a triangle given by angles in degrees, e.g. `"60,60,60"` or
// `"121/2,119/2,60"`. Exact angle tracking is used for the largest-angle
// procedure.
//
// # Safety
// `angles` must be a NUL-terminated string and `out` a writable pointer.
enum AbStatus ab_run_new_angles(const char *angles,
                                uint32_t procedure,
                                uint32_t iterations,
                                struct AbRun **out);

// Refines a triangle given by its side lengths, in numeric mode.
//
// # Safety
// `out` must be a writable pointer.
enum AbStatus ab_run_new_sides(double a,
                               double b,
                               double c,
                               uint32_t procedure,
                               uint32_t iterations,
                               struct AbRun **out);

// # Safety
// `run` must come from `ab_run_new_*` and not have been freed. Null is a no-op.
void ab_run_free(struct AbRun *run);

// Number of generations, including generation 0.
//
// # Safety
// `run` must be a live handle and `out` writable.
enum AbStatus ab_run_generation_count(const struct AbRun *run, uint32_t *out);

// # Safety
// `run` must be a live handle and `out` writable.
enum AbStatus ab_run_stats(const struct AbRun *run, uint32_t n, struct AbGenerationStats *out);

// The run's statistics as JSON. Free the result with `ab_string_free`.
//
// # Safety
// `run` must be a live handle and `out` writable.
enum AbStatus ab_run_to_json(const struct AbRun *run, char **out);

// # Safety
// `s` must come from this library and not have been freed. Null is a no-op.
void ab_string_free(char *s);

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into the library on the same thread.
const char *ab_last_error_message(void);

// Jacobsthal number `j_n`; `n` up to 65 fits in 64 bits.
//
// # Safety
// `out` must be writable.
enum AbStatus ab_jacobsthal(uint32_t n, uint64_t *out);

// `a / (b + c)` with `a` the longest of the three sides.
//
// # Safety
// `out` must be writable.
enum AbStatus ab_aspect_ratio(double a, double b, double c, double *out);

// Runs the property-check suite and returns its JSON report.
// `passed` may be null.
//
// # Safety
// `out` must be writable; `passed` null or writable.
enum AbStatus ab_verify_json(uint32_t depth,
                             uint32_t sweep,
                             uint64_t seed,
                             char **out,
                             bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANGLEBISECT_H */
