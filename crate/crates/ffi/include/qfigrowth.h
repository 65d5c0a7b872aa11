#ifndef QFIGROWTH_H
#define QFIGROWTH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QgStatus {
  QG_STATUS_OK = 0,
  QG_STATUS_NULL_POINTER = 1,
  QG_STATUS_INVALID_ARGUMENT = 2,
  // A value lies outside the domain of the called function.
  QG_STATUS_DOMAIN = 3,
  // Numerical failure during integration or an SLD solve.
  QG_STATUS_NUMERICAL = 4,
  QG_STATUS_BUFFER_TOO_SMALL = 5,
  QG_STATUS_PANIC = 6,
} QgStatus;

typedef enum QgColumn {
  QG_COLUMN_TIME = 0,
  QG_COLUMN_QFI = 1,
  QG_COLUMN_QFI_RATE = 2,
} QgColumn;

// A parameterized Lindblad model.
typedef struct QgModel QgModel;

// A simulated trajectory with its QFI and rate.
typedef struct QgTrajectory QgTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *qg_last_error(void);

// Library version as a static NUL-terminated string.
const char *qg_version(void);

// Qubit with `H = g epsilon sigma_z` and dephasing channel `sqrt(gamma_d) sigma_z`.
//
// # Safety
// `out` must be a valid pointer to a `QgModel*` slot.
enum QgStatus qg_model_dephasing_qubit(double epsilon, double gamma_d, struct QgModel **out);

// Damped oscillator truncated at `n_max` levels with resonant or detuned
// linear forcing `epsilon`.
//
// # Safety
// `out` must be a valid pointer to a `QgModel*` slot.
enum QgStatus qg_model_oscillator(uintptr_t n_max,
                                  double gamma,
                                  double n_thermal,
                                  double epsilon_re,
                                  double epsilon_im,
                                  double detuning,
                                  struct QgModel **out);

// Random model `H0 + g H1` of dimension `dim` with `channels` Lindblad
// operators, drawn deterministically from `seed`.
//
// # Safety
// `out` must be a valid pointer to a `QgModel*` slot.
enum QgStatus qg_model_random(uint64_t seed,
                              uintptr_t dim,
                              uintptr_t channels,
                              struct QgModel **out);

// Hilbert-space dimension, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle from this library.
uintptr_t qg_model_dim(const struct QgModel *model);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a live handle not used afterwards.
void qg_model_free(struct QgModel *model);

// Simulates `model` from the density matrix `rho0` (dimension `dim`) at
// `g = 0` on `points` evenly spaced times in `[0, t_end]` with RK4 step `step`.
//
// # Safety
// `model` must be a live handle, `rho0_re`/`rho0_im` must hold `dim * dim`
// doubles and `out` must be a valid `QgTrajectory*` slot.
enum QgStatus qg_simulate(const struct QgModel *model,
                          uintptr_t dim,
                          const double *rho0_re,
                          const double *rho0_im,
                          double t_end,
                          uintptr_t points,
                          double step,
                          double rank_tol,
                          struct QgTrajectory **out);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
uintptr_t qg_trajectory_len(const struct QgTrajectory *traj);

// Copies one column of the trajectory into `buf`, which must have room
// for [`qg_trajectory_len`] values.
//
// # Safety
// `traj` must be a live handle and `buf` must hold `len` writable doubles.
enum QgStatus qg_trajectory_column(const struct QgTrajectory *traj,
                                   enum QgColumn column,
                                   double *buf,
                                   uintptr_t len);

// Releases a trajectory. Null is ignored.
//
// # Safety
// `traj` must be null or a live handle not used afterwards.
void qg_trajectory_free(struct QgTrajectory *traj);

// QFI of `rho` with derivative `rho_prime`, both `dim x dim`.
//
// # Safety
// All four arrays must hold `dim * dim` doubles and `out` must be writable.
enum QgStatus qg_qfi(uintptr_t dim,
                     const double *rho_re,
                     const double *rho_im,
                     const double *rho_prime_re,
                     const double *rho_prime_im,
                     double rank_tol,
                     double *out);

// Integrated bound for `H'` inside the Lindblad span.
//
// # Safety
// `out` must be writable.
enum QgStatus qg_hls_curve(double c1, double c2, double t, double *out);

// Integrated bound for `H'` with a component outside the Lindblad span.
//
// # Safety
// `out` must be writable.
enum QgStatus qg_hnls_curve(double c0, double c1, double c2, double t, double *out);

// Lower branch `W_{-1}(x)` for `-1/e <= x < 0`.
//
// # Safety
// `out` must be writable.
enum QgStatus qg_lambert_w_m1(double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFIGROWTH_H */
