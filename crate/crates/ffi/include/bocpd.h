/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef BOCPD_FFI_H
#define BOCPD_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Original BOCPD: decisions never feed back into inference.
#define CPD_ALGORITHM_BOCPD 0

// BOCPD with baseline re-initialization after every change point.
#define CPD_ALGORITHM_BOCPD_BLS 1

typedef enum CpdStatus {
  CPD_STATUS_OK = 0,
  CPD_STATUS_NULL_POINTER = 1,
  CPD_STATUS_INVALID_ARGUMENT = 2,
  CPD_STATUS_NON_FINITE = 3,
  CPD_STATUS_BUFFER_TOO_SMALL = 4,
  CPD_STATUS_UNKNOWN_DATASET = 5,
  CPD_STATUS_PANIC = 6,
} CpdStatus;

// Opaque detector handle.
typedef struct CpdDetector CpdDetector;

// One observation's outcome.
typedef struct CpdStep {
  // 1-based time index.
  uint64_t t;
  double x;
  // Observation minus the partition baseline (equals `x` for BOCPD).
  double x_prime;
  int64_t delta;
  // 1 when a change point was declared at `t`.
  uint8_t change_point;
  uint64_t argmax_run_length;
  uint64_t partition;
  // Entries in the run-length posterior after this step.
  uint64_t support_len;
} CpdStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a detector with the default prior centred at `prior_loc`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CpdStatus cpd_detector_new(uint32_t algorithm_code,
                                double lambda,
                                double prior_loc,
                                struct CpdDetector **out);

// Releases a detector. Null is ignored.
//
// # Safety
// `detector` must come from [`cpd_detector_new`] and not be used afterwards.
void cpd_detector_free(struct CpdDetector *detector);

// Feeds one observation. A non-finite `x` returns `CPD_STATUS_NON_FINITE`
// and leaves the detector unchanged.
//
// # Safety
// `detector` must be a live handle; `out` may be null when the step is not
// needed.
enum CpdStatus cpd_detector_observe(struct CpdDetector *detector, double x, struct CpdStep *out);

// Copies the current run-length log-posterior (`ln P(r)`, `r = 0..len`).
//
// # Safety
// `detector` must be a live handle, `out_len` writable, and `buf` valid for
// `cap` doubles.
enum CpdStatus cpd_detector_posterior(const struct CpdDetector *detector,
                                      double *buf,
                                      size_t cap,
                                      size_t *out_len);

// Runs a fresh detector over `values[..len]` and writes the 1-based change
// point indices.
//
// # Safety
// `values` must be valid for `len` doubles, `out_indices` for `cap` entries,
// and `out_count` writable.
enum CpdStatus cpd_detect_series(uint32_t algorithm_code,
                                 double lambda,
                                 const double *values,
                                 size_t len,
                                 uint64_t *out_indices,
                                 size_t cap,
                                 size_t *out_count);

// Draws synthetic dataset `dataset` (1..=6) with `seed`.
//
// # Safety
// `out_values` must be valid for `cap` doubles and `out_len` writable.
enum CpdStatus cpd_generate(uint32_t dataset,
                            uint64_t seed,
                            double *out_values,
                            size_t cap,
                            size_t *out_len);

// Natural-log density of the location-scale Student-t.
//
// # Safety
// `out` must be writable.
enum CpdStatus cpd_log_pdf_student_t(double x, double df, double loc, double scale_sq, double *out);

// Static, NUL-terminated description of a status code (any integer is
// accepted).
const char *cpd_status_message(int32_t status);

// Library version, NUL-terminated.
const char *cpd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOCPD_FFI_H */
