#ifndef RFM_RADAR_H
#define RFM_RADAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfmStatus {
  RFM_STATUS_OK = 0,
  RFM_STATUS_NULL_POINTER = 1,
  RFM_STATUS_INVALID_ARGUMENT = 2,
  RFM_STATUS_DIMENSION_MISMATCH = 3,
  RFM_STATUS_NOT_CONVERGED = 4,
  RFM_STATUS_SINGULAR = 5,
  RFM_STATUS_UNCALIBRATED = 6,
  RFM_STATUS_IO = 7,
  RFM_STATUS_PANIC = 99,
} RfmStatus;

typedef enum RfmDetectorKind {
  RFM_DETECTOR_KIND_MF = 0,
  RFM_DETECTOR_KIND_NMF = 1,
  RFM_DETECTOR_KIND_AMF_SCM = 2,
  RFM_DETECTOR_KIND_ANMF_SCM = 3,
  RFM_DETECTOR_KIND_ANMF_FP = 4,
} RfmDetectorKind;

// One detector matched to a Doppler bin, with an optional threshold.
typedef struct RfmDetector RfmDetector;

// Scenario plus the random stream its samples are drawn from.
typedef struct RfmScenario RfmScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread, excluding
// the terminating NUL. Zero after a successful call.
uintptr_t rfm_last_error_length(void);

// Copies the last error message into `buf` as a NUL-terminated string,
// truncating to `len - 1` bytes. Returns the number of bytes written
// without the NUL, or -1 if `buf` is null or `len` is zero.
//
// # Safety
// `buf` must point to at least `len` writable bytes.
intptr_t rfm_last_error_message(char *buf, uintptr_t len);

// Creates a scenario with `n_pulses` pulses and correlation `rho`.
// `mu > 0` selects compound-Gaussian clutter with texture shape `mu`;
// `mu <= 0` selects homogeneous Gaussian clutter.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum RfmStatus rfm_scenario_new(uintptr_t n_pulses,
                                double rho,
                                double mu,
                                uint64_t seed,
                                struct RfmScenario **out);

// Releases a scenario. Null is ignored.
//
// # Safety
// `s` must be null or a handle from [`rfm_scenario_new`] not yet freed.
void rfm_scenario_free(struct RfmScenario *s);

// Number of pulses N, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live scenario handle.
uintptr_t rfm_scenario_n_pulses(const struct RfmScenario *s);

// Writes the N x N interference covariance, row-major, into `re`/`im`
// (`len` must be N*N).
//
// # Safety
// `s` must be a live scenario; `re` and `im` must hold `len` doubles.
enum RfmStatus rfm_scenario_covariance(const struct RfmScenario *s,
                                       double *re,
                                       double *im,
                                       uintptr_t len);

// Draws one observation of length `n` from the scenario's stream. With
// `h1` false, `snr_db` and `doppler_bin` are ignored.
//
// # Safety
// `s` must be a live scenario; `re` and `im` must hold `n` doubles.
enum RfmStatus rfm_scenario_sample(struct RfmScenario *s,
                                   bool h1,
                                   double snr_db,
                                   double doppler_bin,
                                   double *re,
                                   double *im,
                                   uintptr_t n);

// Draws `k` target-free samples into row-major `re`/`im` of `k*N`
// doubles each.
//
// # Safety
// `s` must be a live scenario; `re` and `im` must hold `k*N` doubles.
enum RfmStatus rfm_scenario_sample_secondary(struct RfmScenario *s,
                                             uintptr_t k,
                                             double *re,
                                             double *im);

// Creates a classical detector matched to `doppler_bin`. MF and NMF use
// the scenario's true covariance; the adaptive ones need secondary data
// at each call.
//
// # Safety
// `s` must be a live scenario; `out` must be writable.
enum RfmStatus rfm_detector_new(const struct RfmScenario *s,
                                enum RfmDetectorKind kind,
                                double doppler_bin,
                                struct RfmDetector **out);

// Loads a D-RFM detector from a checkpoint. A threshold stored in the
// checkpoint is adopted. `steps` is the Euler step count; 0 uses the
// count the stored threshold was calibrated with, or the default.
//
// # Safety
// `s` must be a live scenario, `path` a NUL-terminated string, `out`
// writable.
enum RfmStatus rfm_detector_load_drfm(const struct RfmScenario *s,
                                      const char *path,
                                      uintptr_t steps,
                                      struct RfmDetector **out);

// Releases a detector. Null is ignored.
//
// # Safety
// `d` must be null or a handle from this library not yet freed.
void rfm_detector_free(struct RfmDetector *d);

// Computes the statistic for `y` (length `n`). Adaptive detectors read
// `k` secondary rows from `sec_re`/`sec_im`; others ignore them and
// accept null.
//
// # Safety
// `d` must be a live detector; `y_re`/`y_im` must hold `n` doubles,
// `sec_re`/`sec_im` `k*n` doubles when non-null; `out` must be writable.
enum RfmStatus rfm_detector_statistic(const struct RfmDetector *d,
                                      const double *y_re,
                                      const double *y_im,
                                      uintptr_t n,
                                      const double *sec_re,
                                      const double *sec_im,
                                      uintptr_t k,
                                      double *out);

// Sets the threshold λ; a statistic above λ decides H1.
//
// # Safety
// `d` must be a live detector.
enum RfmStatus rfm_detector_set_threshold(struct RfmDetector *d, double lambda, double pfa_target);

// Reads the current threshold, or returns `RFM_STATUS_UNCALIBRATED`.
//
// # Safety
// `d` must be a live detector; `out` must be writable.
enum RfmStatus rfm_detector_threshold(const struct RfmDetector *d, double *out);

// Writes `true` to `h1` iff `statistic` exceeds the threshold.
//
// # Safety
// `d` must be a live detector; `h1` must be writable.
enum RfmStatus rfm_detector_decide(const struct RfmDetector *d, double statistic, bool *h1);

// Closed-form MF threshold for a target false-alarm probability.
//
// # Safety
// `out` must be writable.
enum RfmStatus rfm_threshold_mf(double pfa, double *out);

// Closed-form NMF threshold for `n` pulses.
//
// # Safety
// `out` must be writable.
enum RfmStatus rfm_threshold_nmf(double pfa, uintptr_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RFM_RADAR_H */
