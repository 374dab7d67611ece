#ifndef COADJOINT_H
#define COADJOINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoadjointStatus {
  COADJOINT_STATUS_OK = 0,
  COADJOINT_STATUS_NULL_POINTER = 1,
  COADJOINT_STATUS_INVALID_ARGUMENT = 2,
  COADJOINT_STATUS_DIMENSION_MISMATCH = 3,
  COADJOINT_STATUS_SOLVER_FAILED = 4,
  COADJOINT_STATUS_NON_FINITE = 5,
  COADJOINT_STATUS_CONFIG = 6,
  COADJOINT_STATUS_IO = 7,
  COADJOINT_STATUS_UNSUPPORTED = 8,
  COADJOINT_STATUS_PANIC = 9,
} CoadjointStatus;

typedef enum CoadjointMethod {
  COADJOINT_METHOD_TMK = 0,
  COADJOINT_METHOD_DIRECT_IM = 1,
  COADJOINT_METHOD_DIRECT_TRAPEZOIDAL = 2,
  COADJOINT_METHOD_EULER_MARUYAMA_MK = 3,
  COADJOINT_METHOD_DETERMINISTIC_RKMK = 4,
} CoadjointMethod;

// A model: algebra, Hamiltonians, Casimirs and initial state.
typedef struct CoadjointModel CoadjointModel;

// A recorded trajectory with Casimir values at every step.
typedef struct CoadjointTrajectory CoadjointTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call on this thread.
const char *coadjoint_last_error(void);

// Library version as a static NUL-terminated string.
const char *coadjoint_version(void);

// Builds a heavy top. Each pointer addresses three doubles.
//
// # Safety
// The input pointers must be valid for three reads and `out` for one write.
enum CoadjointStatus coadjoint_model_heavy_top(const double *inertia,
                                               const double *chi,
                                               const double *alpha,
                                               const double *pi0,
                                               const double *gamma0,
                                               struct CoadjointModel **out);

// Builds the model described by a TOML configuration, as read by the CLI.
//
// # Safety
// `config` must be a NUL-terminated string and `out` valid for one write.
enum CoadjointStatus coadjoint_model_from_config(const char *config, struct CoadjointModel **out);

// # Safety
// `model` must come from a `coadjoint_model_*` constructor or be null.
void coadjoint_model_free(struct CoadjointModel *model);

// Algebra dimension, or 0 for a null handle.
//
// # Safety
// `model` must be a live handle or null.
size_t coadjoint_model_dim(const struct CoadjointModel *model);

// Number of Wiener drivers, or 0 for a null handle.
//
// # Safety
// `model` must be a live handle or null.
size_t coadjoint_model_drivers(const struct CoadjointModel *model);

// Number of Casimirs, or 0 for a null handle.
//
// # Safety
// `model` must be a live handle or null.
size_t coadjoint_model_casimir_count(const struct CoadjointModel *model);

// Copies the initial state into `out[0..dim]`.
//
// # Safety
// `model` must be a live handle and `out` valid for `len` writes.
enum CoadjointStatus coadjoint_model_initial_state(const struct CoadjointModel *model,
                                                   double *out,
                                                   size_t len);

// Evaluates the Casimirs at `state[0..dim]` into `out[0..casimir_count]`.
//
// # Safety
// `model` must be a live handle, `state` valid for `dim` reads and `out`
// for `len` writes.
enum CoadjointStatus coadjoint_model_casimirs(const struct CoadjointModel *model,
                                              const double *state,
                                              double *out,
                                              size_t len);

// Integrates `steps` steps of size `dt` on the Wiener path drawn from
// `seed`. `mu0` may be null to start from the model's initial state.
//
// # Safety
// `model` must be a live handle, `mu0` null or valid for `dim` reads, and
// `out` valid for one write.
enum CoadjointStatus coadjoint_integrate(const struct CoadjointModel *model,
                                         enum CoadjointMethod method,
                                         double dt,
                                         size_t steps,
                                         uint64_t seed,
                                         const double *mu0,
                                         struct CoadjointTrajectory **out);

// # Safety
// `traj` must come from [`coadjoint_integrate`] or be null.
void coadjoint_trajectory_free(struct CoadjointTrajectory *traj);

// Number of recorded states (steps + 1), or 0 for a null handle.
//
// # Safety
// `traj` must be a live handle or null.
size_t coadjoint_trajectory_len(const struct CoadjointTrajectory *traj);

// Time of record `index`, or NaN when out of range.
//
// # Safety
// `traj` must be a live handle or null.
double coadjoint_trajectory_time(const struct CoadjointTrajectory *traj, size_t index);

// Copies state `index` into `out[0..dim]`.
//
// # Safety
// `traj` must be a live handle and `out` valid for `len` writes.
enum CoadjointStatus coadjoint_trajectory_state(const struct CoadjointTrajectory *traj,
                                                size_t index,
                                                double *out,
                                                size_t len);

// Copies the Casimir values at record `index` into `out`.
//
// # Safety
// `traj` must be a live handle and `out` valid for `len` writes.
enum CoadjointStatus coadjoint_trajectory_casimirs(const struct CoadjointTrajectory *traj,
                                                   size_t index,
                                                   double *out,
                                                   size_t len);

// Largest relative (or, for a vanishing initial value, absolute) Casimir
// drift over the whole run, one value per Casimir.
//
// # Safety
// `traj` must be a live handle and `out` valid for `len` writes.
enum CoadjointStatus coadjoint_trajectory_max_drift(const struct CoadjointTrajectory *traj,
                                                    double *out,
                                                    size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COADJOINT_H */
