#ifndef DH_FFI_H
#define DH_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DhStatus {
  DH_STATUS_OK = 0,
  DH_STATUS_NULL_POINTER = 1,
  DH_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a value rejected by validation.
   */
  DH_STATUS_INVALID_INPUT = 3,
  /**
   * Fixed-point data that violates localization or realizability.
   */
  DH_STATUS_INCONSISTENT = 4,
  DH_STATUS_PANIC = 5,
} DhStatus;

/**
 * Piecewise-linear density.
 */
typedef struct DhDensity DhDensity;

/**
 * Fixed-point data of a circle action.
 */
typedef struct DhFixedPointData DhFixedPointData;

/**
 * Convex lattice polytope.
 */
typedef struct DhPolytope DhPolytope;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dh_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void dh_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DhStatus dh_fixed_point_data_from_json(const char *json, struct DhFixedPointData **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, freed at most once.
 */
void dh_fixed_point_data_free(struct DhFixedPointData *p);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DhStatus dh_polytope_from_json(const char *json, struct DhPolytope **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, freed at most once.
 */
void dh_polytope_free(struct DhPolytope *p);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DhStatus dh_density_from_json(const char *json, struct DhDensity **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, freed at most once.
 */
void dh_density_free(struct DhDensity *p);

/**
 * Density of fixed-point data. Fails with `Inconsistent` when the data
 * does not close up.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_build_density(const struct DhFixedPointData *data, struct DhDensity **out);

/**
 * Telescoped value at the top level minus the declared one, as "p/q".
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_closure_residual(const struct DhFixedPointData *data, char **out);

/**
 * Push-forward of Lebesgue measure along an integer direction.
 *
 * # Safety
 * `poly` must be a live handle; `coords` must point to `len` integers;
 * `out` must be writable.
 */
enum DhStatus dh_slice_density(const struct DhPolytope *poly,
                               const int64_t *coords,
                               size_t len,
                               struct DhDensity **out);

/**
 * Compares the polygon slice with the density rebuilt from its fixed
 * points. `equal` is false when the fixed-point route fails.
 *
 * # Safety
 * `poly` must be a live handle; `coords` must point to `len` integers;
 * `equal` must be writable.
 */
enum DhStatus dh_crossval(const struct DhPolytope *poly,
                          const int64_t *coords,
                          size_t len,
                          bool *equal);

/**
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_density_is_log_concave(const struct DhDensity *f, bool *out);

/**
 * Evaluates at a "p/q" point; the result is a "p/q" string.
 *
 * # Safety
 * `f` must be a live handle; `t` a NUL-terminated string; `out` writable.
 */
enum DhStatus dh_density_evaluate(const struct DhDensity *f, const char *t, char **out);

/**
 * Canonical JSON form of the density.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_density_to_json(const struct DhDensity *f, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DH_FFI_H */
