#ifndef MMWSIM_H
#define MMWSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MmwMetric {
  MMW_METRIC_SNR_DB = 0,
  MMW_METRIC_SINR_DB = 1,
  MMW_METRIC_RX_POWER_DBM = 2,
  MMW_METRIC_INTERFERENCE_DBM = 3,
  MMW_METRIC_THROUGHPUT_BPS = 4,
} MmwMetric;

typedef enum MmwStatus {
  MMW_STATUS_OK = 0,
  MMW_STATUS_NULL_POINTER = 1,
  MMW_STATUS_INVALID_ARGUMENT = 2,
  MMW_STATUS_CONFIG = 3,
  MMW_STATUS_PARSE = 4,
  MMW_STATUS_NUMERICAL = 5,
  MMW_STATUS_IO = 6,
  MMW_STATUS_PANIC = 7,
} MmwStatus;

typedef struct MmwArray MmwArray;

typedef struct MmwCodebook MmwCodebook;

typedef struct MmwRun MmwRun;

typedef struct MmwTrace MmwTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *mmw_last_error(void);

/**
 * Thermal noise power in dBm.
 */
double mmw_noise_power_dbm(double bandwidth_hz,
                           double noise_figure_db,
                           double noise_density_dbm_hz);

/**
 * Isotropic `rows x cols` array with the given spacings in wavelengths.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum MmwStatus mmw_array_new(size_t rows,
                             size_t cols,
                             double spacing_v,
                             double spacing_h,
                             struct MmwArray **out);

/**
 * # Safety
 * `a` must be null or a handle from [`mmw_array_new`] not yet freed.
 */
void mmw_array_free(struct MmwArray *a);

/**
 * Switches the element pattern to the 3GPP element.
 *
 * # Safety
 * `a` must be a live array handle.
 */
enum MmwStatus mmw_array_set_element_3gpp(struct MmwArray *a);

/**
 * Switches the element pattern to a cosine element.
 *
 * # Safety
 * `a` must be a live array handle.
 */
enum MmwStatus mmw_array_set_element_cosine(struct MmwArray *a,
                                            double beamwidth_h_deg,
                                            double beamwidth_v_deg);

/**
 * # Safety
 * `a` must be a live array handle.
 */
enum MmwStatus mmw_array_set_orientation(struct MmwArray *a,
                                         double bearing_deg,
                                         double downtilt_deg);

/**
 * Number of elements, or 0 for a null handle.
 *
 * # Safety
 * `a` must be null or a live array handle.
 */
size_t mmw_array_num_elements(const struct MmwArray *a);

/**
 * Gain in dB toward `(eval_theta, eval_phi)` of the array steered to
 * `(steer_theta, steer_phi)`, both in the array-local frame.
 *
 * # Safety
 * `a` must be a live array handle and `out_db` writable.
 */
enum MmwStatus mmw_array_steered_gain_db(const struct MmwArray *a,
                                         double steer_theta_deg,
                                         double steer_phi_deg,
                                         double eval_theta_deg,
                                         double eval_phi_deg,
                                         double *out_db);

/**
 * # Safety
 * `a` must be a live array handle and `out` writable.
 */
enum MmwStatus mmw_codebook_generate(const struct MmwArray *a, struct MmwCodebook **out);

/**
 * # Safety
 * `cb` must be null or a live codebook handle.
 */
void mmw_codebook_free(struct MmwCodebook *cb);

/**
 * # Safety
 * `cb` must be null or a live codebook handle.
 */
size_t mmw_codebook_len(const struct MmwCodebook *cb);

/**
 * Copies codeword `index` into `re`/`im`, each of length `len`, which
 * must equal the number of array elements.
 *
 * # Safety
 * `cb` must be a live codebook handle; `re` and `im` must point to `len`
 * writable doubles.
 */
enum MmwStatus mmw_codebook_weights(const struct MmwCodebook *cb,
                                    size_t index,
                                    double *re,
                                    double *im,
                                    size_t len);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum MmwStatus mmw_trace_load(const char *path, struct MmwTrace **out);

/**
 * # Safety
 * `t` must be null or a live trace handle.
 */
void mmw_trace_free(struct MmwTrace *t);

/**
 * # Safety
 * `t` must be null or a live trace handle.
 */
size_t mmw_trace_num_links(const struct MmwTrace *t);

/**
 * # Safety
 * `t` must be null or a live trace handle.
 */
size_t mmw_trace_num_samples(const struct MmwTrace *t);

/**
 * Loads a scenario file and runs it against its trace.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string and `out` writable.
 */
enum MmwStatus mmw_run_config(const char *config_path, struct MmwRun **out);

/**
 * # Safety
 * `r` must be null or a live run handle.
 */
void mmw_run_free(struct MmwRun *r);

/**
 * Number of associations (record series) in the run.
 *
 * # Safety
 * `r` must be null or a live run handle.
 */
size_t mmw_run_num_series(const struct MmwRun *r);

/**
 * Samples per series.
 *
 * # Safety
 * `r` must be null or a live run handle.
 */
size_t mmw_run_num_samples(const struct MmwRun *r);

/**
 * Number of codebook search instants (0 for SVD runs).
 *
 * # Safety
 * `r` must be null or a live run handle.
 */
size_t mmw_run_num_searches(const struct MmwRun *r);

/**
 * Copies one metric of series `series` into `buf` (length `len`, which
 * must equal the sample count). Zero power is `-INFINITY`.
 *
 * # Safety
 * `r` must be a live run handle and `buf` must point to `len` writable doubles.
 */
enum MmwStatus mmw_run_metric(const struct MmwRun *r,
                              size_t series,
                              enum MmwMetric metric,
                              double *buf,
                              size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MMWSIM_H */
