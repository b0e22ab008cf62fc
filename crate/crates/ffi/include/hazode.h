#ifndef HAZODE_H
#define HAZODE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Trajectory channel selector.
 */
typedef enum HazodeChannel {
  HAZODE_CHANNEL_HAZARD = 0,
  HAZODE_CHANNEL_SLOPE = 1,
  HAZODE_CHANNEL_CUM_HAZARD = 2,
} HazodeChannel;

/*
 Status column convention for CSV ingest.
 */
typedef enum HazodeConvention {
  /*
   1 = event, 0 = censored.
   */
  HAZODE_CONVENTION_STATUS01 = 0,
  /*
   2 = event, 1 = censored.
   */
  HAZODE_CONVENTION_STATUS12 = 1,
} HazodeConvention;

/*
 Result code of every fallible call.
 */
typedef enum HazodeStatus {
  HAZODE_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  HAZODE_STATUS_NULL_POINTER = 1,
  /*
   Invalid parameters, configuration or arguments.
   */
  HAZODE_STATUS_CONFIG = 2,
  /*
   Numerical failure (non-positive hazard, blow-up, non-convergence).
   */
  HAZODE_STATUS_NUMERIC = 3,
  /*
   Malformed or inconsistent data.
   */
  HAZODE_STATUS_DATA = 4,
  /*
   Caller buffer too small; the required length is reported.
   */
  HAZODE_STATUS_BUFFER_TOO_SMALL = 5,
  /*
   A Rust panic was caught at the boundary.
   */
  HAZODE_STATUS_INTERNAL = 6,
} HazodeStatus;

/*
 Opaque right-censored dataset.
 */
typedef struct HazodeDataset HazodeDataset;

/*
 Opaque hazard model.
 */
typedef struct HazodeModel HazodeModel;

/*
 Opaque solved trajectory (t, h, v, H on a uniform grid).
 */
typedef struct HazodeTrajectory HazodeTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`) and returns the full message length in bytes.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
uintptr_t hazode_last_error(char *buf, uintptr_t len);

/*
 Builds a model from `key = value` lines, e.g.
 `"model = damped\nalpha = 0.5\nbeta = 1\ngamma = 0.2\nh0 = 0.1\nv0 = 0.3"`.

 # Safety
 `text` must be a NUL-terminated string; `model_out` must be writable.
 */
enum HazodeStatus hazode_model_from_kv(const char *text, struct HazodeModel **model_out);

/*
 # Safety
 `model` must be null or a handle from this library, freed at most once.
 */
void hazode_model_free(struct HazodeModel *model);

/*
 Closed-form `h(t)` and `H(t)` when the family has them; otherwise
 [`HazodeStatus::Config`] (integrate a trajectory instead).

 # Safety
 Pointers must be valid; outputs may be null when not wanted.
 */
enum HazodeStatus hazode_model_closed_form(const struct HazodeModel *model,
                                           double t,
                                           double *hazard_out,
                                           double *cum_hazard_out);

/*
 Integrates the model on `[0, t_end]` with step `dt`.

 # Safety
 `model` must be a valid handle; `traj_out` must be writable.
 */
enum HazodeStatus hazode_trajectory_new(const struct HazodeModel *model,
                                        double t_end,
                                        double dt,
                                        struct HazodeTrajectory **traj_out);

/*
 # Safety
 `traj` must be null or a handle from this library, freed at most once.
 */
void hazode_trajectory_free(struct HazodeTrajectory *traj);

/*
 Number of grid points (0 for a null handle).

 # Safety
 `traj` must be null or a valid handle.
 */
uintptr_t hazode_trajectory_len(const struct HazodeTrajectory *traj);

/*
 Copies one channel into `buf`, which must hold at least
 [`hazode_trajectory_len`] values.

 # Safety
 `buf` must be valid for `len` writes.
 */
enum HazodeStatus hazode_trajectory_copy(const struct HazodeTrajectory *traj,
                                         enum HazodeChannel which,
                                         double *buf,
                                         uintptr_t len);

/*
 Linear interpolation of one channel at `t`.

 # Safety
 Pointers must be valid.
 */
enum HazodeStatus hazode_trajectory_interp(const struct HazodeTrajectory *traj,
                                           enum HazodeChannel which,
                                           double t,
                                           double *value_out);

/*
 Wraps caller arrays as a dataset; `events[i]` is nonzero for an event.

 # Safety
 `times` and `events` must be valid for `n` reads.
 */
enum HazodeStatus hazode_dataset_new(const double *times,
                                     const uint8_t *events,
                                     uintptr_t n,
                                     struct HazodeDataset **data_out);

/*
 Parses a `time,status` CSV held in memory. With `days_to_years` nonzero,
 times are divided by 365.25.

 # Safety
 `csv` must be a NUL-terminated string; `data_out` must be writable.
 */
enum HazodeStatus hazode_dataset_from_csv(const char *csv,
                                          enum HazodeConvention convention,
                                          uint8_t days_to_years,
                                          struct HazodeDataset **data_out);

/*
 Simulates `n` observations from `model` with `Uniform(0, c_max)`
 censoring; `c_max <= 0` means no censoring. Deterministic in `seed`.

 # Safety
 `model` must be a valid handle; `data_out` must be writable.
 */
enum HazodeStatus hazode_simulate(const struct HazodeModel *model,
                                  uintptr_t n,
                                  double c_max,
                                  uint64_t seed,
                                  struct HazodeDataset **data_out);

/*
 # Safety
 `data` must be null or a handle from this library, freed at most once.
 */
void hazode_dataset_free(struct HazodeDataset *data);

/*
 Number of observations (0 for a null handle).

 # Safety
 `data` must be null or a valid handle.
 */
uintptr_t hazode_dataset_len(const struct HazodeDataset *data);

/*
 Copies times and event indicators out; either buffer may be null.

 # Safety
 Non-null buffers must be valid for `len` writes.
 */
enum HazodeStatus hazode_dataset_copy(const struct HazodeDataset *data,
                                      double *times,
                                      uint8_t *events,
                                      uintptr_t len);

/*
 Right-censored log-likelihood of `data` under `model`.

 # Safety
 Pointers must be valid.
 */
enum HazodeStatus hazode_log_likelihood(const struct HazodeModel *model,
                                        const struct HazodeDataset *data,
                                        double *value_out);

/*
 `E[exp(sT)]`. On divergence `*divergent_out = 1` and `*value_out` is
 `+inf`; the call still returns [`HazodeStatus::Ok`].

 # Safety
 Pointers must be valid.
 */
enum HazodeStatus hazode_mgf(const struct HazodeModel *model,
                             double s,
                             double *value_out,
                             uint8_t *divergent_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAZODE_H */
