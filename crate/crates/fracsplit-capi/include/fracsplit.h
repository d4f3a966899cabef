#ifndef FRACSPLIT_H
#define FRACSPLIT_H

/* Generated by cbindgen from the fracsplit-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible C-ABI call.
 */
typedef enum FsStatus {
  FsOk = 0,
  FsNullPointer = 1,
  FsInvalidParameter = 2,
  FsInvalidData = 3,
  FsAccuracy = 4,
  FsBlowUp = 5,
  FsIoError = 6,
  FsConfigError = 7,
  FsUtf8 = 8,
  FsPanic = 9,
} FsStatus;

/**
 * Validated run configuration (opaque).
 */
typedef struct FsConfig FsConfig;

/**
 * Finished simulation trajectory (opaque).
 */
typedef struct FsTrajectory FsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static NUL-terminated string.
 */
const char *fs_version(void);

/**
 * Last error message of the calling thread (valid until the next
 * failing call on this thread).
 */
const char *fs_last_error_message(void);

/**
 * Parse and validate a JSON run configuration.
 *
 * On success `*out` owns a new handle; release with [`fs_config_free`].
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum FsStatus fs_config_parse(const char *json, struct FsConfig **out);

/**
 * # Safety
 * `cfg` must be a handle from [`fs_config_parse`] (or null).
 */
void fs_config_free(struct FsConfig *cfg);

/**
 * Run the configured simulation; on success `*out` owns a trajectory.
 *
 * `seed_override` replaces the config seed when `use_seed_override` is
 * nonzero (randomized initial conditions).
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum FsStatus fs_simulate(const struct FsConfig *cfg,
                          int32_t use_seed_override,
                          uint64_t seed_override,
                          struct FsTrajectory **out);

/**
 * # Safety
 * `traj` must be a handle from [`fs_simulate`] (or null).
 */
void fs_trajectory_free(struct FsTrajectory *traj);

/**
 * Number of stored snapshots (periods + 1); 0 for a null handle.
 *
 * # Safety
 * `traj` must be a live handle or null.
 */
uintptr_t fs_trajectory_snapshot_count(const struct FsTrajectory *traj);

/**
 * Values per snapshot (grid points x state components).
 *
 * # Safety
 * `traj` must be a live handle or null.
 */
uintptr_t fs_trajectory_values_len(const struct FsTrajectory *traj);

/**
 * Time of snapshot `index`.
 *
 * # Safety
 * `traj` must be a live handle; `out` a valid pointer.
 */
enum FsStatus fs_trajectory_time(const struct FsTrajectory *traj, uintptr_t index, double *out);

/**
 * Copy snapshot `index` into `buffer` (row-major over the grid, then
 * state components), exactly `len == fs_trajectory_values_len` values.
 *
 * # Safety
 * `traj` must be a live handle; `buffer` must point to `len` f64 slots.
 */
enum FsStatus fs_trajectory_copy_snapshot(const struct FsTrajectory *traj,
                                          uintptr_t index,
                                          double *buffer,
                                          uintptr_t len);

/**
 * Sup-norm monitor value at snapshot `index`.
 *
 * # Safety
 * `traj` must be a live handle; `out` a valid pointer.
 */
enum FsStatus fs_trajectory_sup_norm(const struct FsTrajectory *traj, uintptr_t index, double *out);

/**
 * Rotation-invariant stable density g_beta at the point `x[0..dim]`.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be valid.
 */
enum FsStatus fs_stable_density(double beta, uintptr_t dim, const double *x, double *out);

/**
 * Heat kernel G_{sigma,beta}(t, x) at the point `x[0..dim]`.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be valid.
 */
enum FsStatus fs_heat_kernel(double sigma,
                             double beta,
                             uintptr_t dim,
                             double t,
                             const double *x,
                             double *out);

/**
 * Mass of g_beta outside |y| > radius in one dimension.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FsStatus fs_stable_tail_mass(double beta, double radius, double *out);

/**
 * On/off schedule weight alpha_h(t) in {0, 2}.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FsStatus fs_alpha(double h, double t, double *out);

/**
 * Schedule integral tau_h(t, t_prev) in closed form.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FsStatus fs_tau(double h, double t, double t_prev, double *out);

/**
 * Fisher envelopes (a(t), b(t)) for the interval family.
 *
 * # Safety
 * `out_a` and `out_b` must be valid pointers.
 */
enum FsStatus fs_fisher_envelopes(double a0,
                                  double b0,
                                  double chi,
                                  double t,
                                  double *out_a,
                                  double *out_b);

/**
 * FitzHugh-Nagumo invariant rectangle (R1, R2) and the worst certified
 * sign margin of the outward boundary field (negative = inward).
 *
 * # Safety
 * All out-pointers must be valid.
 */
enum FsStatus fs_fhn_rectangle(double a,
                               double e,
                               double b,
                               double *out_r1,
                               double *out_r2,
                               double *out_worst_margin);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSPLIT_H */
