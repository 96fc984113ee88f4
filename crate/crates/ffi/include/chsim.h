#ifndef CHSIM_H
#define CHSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a fallible call.
 */
typedef enum ChsimStatus {
  CHSIM_STATUS_OK = 0,
  CHSIM_STATUS_NULL_POINTER = 1,
  CHSIM_STATUS_INVALID_ARGUMENT = 2,
  CHSIM_STATUS_CONFIGURATION = 3,
  CHSIM_STATUS_SINGULAR = 4,
  CHSIM_STATUS_SOLVER = 5,
  CHSIM_STATUS_INTEGRATION = 6,
  CHSIM_STATUS_INCOMPATIBLE = 7,
  CHSIM_STATUS_NUMERICAL = 8,
  CHSIM_STATUS_IO = 9,
  CHSIM_STATUS_OUT_OF_RANGE = 10,
  CHSIM_STATUS_PANIC = 11,
} ChsimStatus;

/**
 * Density reconstruction for finite-difference two-component schemes.
 */
typedef enum ChsimRhoInterp {
  CHSIM_RHO_INTERP_DEFAULT = 0,
  CHSIM_RHO_INTERP_CONSTANT = 1,
  CHSIM_RHO_INTERP_LINEAR = 2,
} ChsimRhoInterp;

/**
 * Periodic multipeakon state.
 */
typedef struct ChsimPeakons ChsimPeakons;

/**
 * Rows produced by a sweep.
 */
typedef struct ChsimResults ChsimResults;

/**
 * Sweep configuration.
 */
typedef struct ChsimSweep ChsimSweep;

/**
 * One period of a traveling wave.
 */
typedef struct ChsimWave ChsimWave;

/**
 * One grid size of a convergence sweep. Missing values are NaN, missing
 * step counts are -1. `failed` is nonzero when the run produced no data.
 */
typedef struct ChsimRow {
  uint64_t n;
  double t_final;
  double l2_error;
  double h1_error;
  double rho_l2_error;
  double runtime_seconds;
  double energy_deviation;
  double momentum_deviation;
  int64_t accepted_steps;
  int64_t rejected_steps;
  int32_t failed;
} ChsimRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *chsim_last_error(void);

/**
 * Static description of a status code.
 */
const char *chsim_status_string(enum ChsimStatus status);

/**
 * Create a sweep for an experiment and scheme given by their CLI names.
 *
 * # Safety
 * `experiment` and `scheme` must be nul-terminated strings; `out` must be writable.
 */
enum ChsimStatus chsim_sweep_new(const char *experiment,
                                 const char *scheme,
                                 struct ChsimSweep **out);

/**
 * # Safety
 * `sweep` must come from [`chsim_sweep_new`] or be null.
 */
void chsim_sweep_free(struct ChsimSweep *sweep);

/**
 * Grid sizes `2^kmin ..= 2^kmax`. The reference grid follows at `kmax + 2`.
 *
 * # Safety
 * `sweep` must be a live handle.
 */
enum ChsimStatus chsim_sweep_set_levels(struct ChsimSweep *sweep, uint32_t kmin, uint32_t kmax);

/**
 * # Safety
 * `sweep` must be a live handle.
 */
enum ChsimStatus chsim_sweep_set_tolerances(struct ChsimSweep *sweep,
                                            double abs_tol,
                                            double rel_tol);

/**
 * # Safety
 * `sweep` must be a live handle.
 */
enum ChsimStatus chsim_sweep_set_shifted_grid(struct ChsimSweep *sweep, bool shifted);

/**
 * # Safety
 * `sweep` must be a live handle.
 */
enum ChsimStatus chsim_sweep_set_rho_interp(struct ChsimSweep *sweep, enum ChsimRhoInterp mode);

/**
 * Timing repetitions per grid size; the median runtime is reported.
 *
 * # Safety
 * `sweep` must be a live handle.
 */
enum ChsimStatus chsim_sweep_set_repeats(struct ChsimSweep *sweep, size_t repeats);

/**
 * Run the sweep. Per-size failures appear as failed rows, not as an error.
 *
 * # Safety
 * `sweep` must be a live handle; `out` must be writable.
 */
enum ChsimStatus chsim_sweep_run(const struct ChsimSweep *sweep, struct ChsimResults **out);

/**
 * # Safety
 * `results` must come from [`chsim_sweep_run`] or be null.
 */
void chsim_results_free(struct ChsimResults *results);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `results` must be a live handle or null.
 */
size_t chsim_results_len(const struct ChsimResults *results);

/**
 * # Safety
 * `results` must be a live handle; `out` must be writable.
 */
enum ChsimStatus chsim_results_row(const struct ChsimResults *results,
                                   size_t index,
                                   struct ChsimRow *out);

/**
 * Failure message of a row, or null if the row succeeded or is out of range.
 * Valid while `results` lives.
 *
 * # Safety
 * `results` must be a live handle or null.
 */
const char *chsim_results_failure(const struct ChsimResults *results, size_t index);

/**
 * Traveling wave of the one-component equation (`two_component == false`)
 * or of the two-component system.
 *
 * # Safety
 * `out` must be writable.
 */
enum ChsimStatus chsim_wave_new(bool two_component, struct ChsimWave **out);

/**
 * # Safety
 * `wave` must come from [`chsim_wave_new`] or be null.
 */
void chsim_wave_free(struct ChsimWave *wave);

/**
 * Speed and period of the wave.
 *
 * # Safety
 * `wave` must be a live handle; outputs must be writable.
 */
enum ChsimStatus chsim_wave_info(const struct ChsimWave *wave, double *speed, double *period);

/**
 * Evaluate `u`, `u_x` and `rho` at points `x[0..len]` and time `t`.
 * `rho` may be null; for the one-component wave it is filled with NaN.
 *
 * # Safety
 * `wave` must be a live handle; arrays must hold `len` values.
 */
enum ChsimStatus chsim_wave_eval(const struct ChsimWave *wave,
                                 double t,
                                 const double *x,
                                 size_t len,
                                 double *u,
                                 double *ux,
                                 double *rho);

/**
 * Periodic multipeakon with positions `y`, heights `u` (both length `n`)
 * on a domain of length `period`. Positions must be nondecreasing within
 * one period; the energy distribution is the one of the peakon profile.
 *
 * # Safety
 * `y` and `u` must hold `n` values; `out` must be writable.
 */
enum ChsimStatus chsim_peakons_new(const double *y,
                                   const double *u,
                                   size_t n,
                                   double period,
                                   struct ChsimPeakons **out);

/**
 * # Safety
 * `peakons` must come from [`chsim_peakons_new`] or be null.
 */
void chsim_peakons_free(struct ChsimPeakons *peakons);

/**
 * Number of peaks, or 0 for a null handle.
 *
 * # Safety
 * `peakons` must be a live handle or null.
 */
size_t chsim_peakons_len(const struct ChsimPeakons *peakons);

/**
 * Copy positions, heights and cumulative energies into arrays of length
 * [`chsim_peakons_len`]. Any output may be null.
 *
 * # Safety
 * `peakons` must be a live handle; non-null arrays must be large enough.
 */
enum ChsimStatus chsim_peakons_get(const struct ChsimPeakons *peakons,
                                   double *y,
                                   double *u,
                                   double *h);

/**
 * Energy and momentum over one period.
 *
 * # Safety
 * `peakons` must be a live handle; outputs must be writable.
 */
enum ChsimStatus chsim_peakons_invariants(const struct ChsimPeakons *peakons,
                                          double *energy,
                                          double *momentum);

/**
 * Evaluate `u` and `u_x` of the interpolant at points `x[0..len]`.
 *
 * # Safety
 * `peakons` must be a live handle; arrays must hold `len` values.
 */
enum ChsimStatus chsim_peakons_eval(const struct ChsimPeakons *peakons,
                                    const double *x,
                                    size_t len,
                                    double *u,
                                    double *ux);

/**
 * Advance the state in place by `dt >= 0` with the adaptive integrator.
 *
 * # Safety
 * `peakons` must be a live handle.
 */
enum ChsimStatus chsim_peakons_advance(struct ChsimPeakons *peakons,
                                       double dt,
                                       double abs_tol,
                                       double rel_tol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHSIM_H */
