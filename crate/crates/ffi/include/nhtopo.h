#ifndef NHTOPO_H
#define NHTOPO_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NhStatus {
  NH_STATUS_OK = 0,
  /**
   * Null pointer, out-of-range index or malformed argument.
   */
  NH_STATUS_INVALID_ARGUMENT = 1,
  NH_STATUS_CONFIG = 2,
  /**
   * Exceptional point, positivity loss, failed fit and similar.
   */
  NH_STATUS_NUMERICAL = 3,
  NH_STATUS_IO = 4,
  NH_STATUS_PANIC = 5,
} NhStatus;

/**
 * Model parameters.
 */
typedef struct NhModel NhModel;

/**
 * Result of a k-sweep.
 */
typedef struct NhScan NhScan;

typedef struct NhComplex {
  double re;
  double im;
} NhComplex;

typedef struct NhField {
  struct NhComplex hx;
  struct NhComplex hy;
  struct NhComplex hz;
} NhField;

/**
 * `w_plus`/`w_minus` are NaN when the bands exchange around the loop.
 */
typedef struct NhWindings {
  double w_plus;
  double w_minus;
  int64_t w_t;
  double w_t_raw;
  int64_t nu_e;
  double nu_e_raw;
  /**
   * 1 when both residuals are within the rounding tolerance.
   */
  int32_t quantized;
} NhWindings;

/**
 * Failed rows have NaN values and `ok == 0`.
 */
typedef struct NhScanRow {
  double k;
  double phi_pp;
  double phi_mm;
  double re_phi;
  double re_e;
  double im_e;
  int32_t ok;
} NhScanRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success.
 * Valid until the next call into the library on this thread.
 */
const char *nh_last_error(void);

const char *nh_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NhStatus nh_model_new(double j0,
                           double j1,
                           double j2,
                           double delta,
                           double hz,
                           struct NhModel **out);

/**
 * # Safety
 * `model` must come from [`nh_model_new`] and not be used afterwards. Null is ignored.
 */
void nh_model_free(struct NhModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum NhStatus nh_model_field(const struct NhModel *model, double k, struct NhField *out);

/**
 * Upper-band energy `E₊` (`E₋ = −E₊`).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum NhStatus nh_model_energy(const struct NhModel *model, double k, struct NhComplex *out);

/**
 * Eigenstate textures `[+x, +y, +z, −x, −y, −z]` written to `out[0..6]`.
 *
 * # Safety
 * `model` must be a live handle and `out` must point to 6 writable doubles.
 */
enum NhStatus nh_model_textures(const struct NhModel *model, double k, double *out);

/**
 * Invariants on a uniform grid of `grid` points (0 selects the default).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum NhStatus nh_model_windings(const struct NhModel *model, size_t grid, struct NhWindings *out);

/**
 * Run a scan from a JSON scenario; null or `"{}"` selects the defaults.
 *
 * # Safety
 * `config_json` must be null or a NUL-terminated string; `out` writable.
 */
enum NhStatus nh_scan_run(const char *config_json, struct NhScan **out);

/**
 * # Safety
 * `scan` must be null or a live handle.
 */
size_t nh_scan_len(const struct NhScan *scan);

/**
 * # Safety
 * `scan` must be a live handle and `out` writable.
 */
enum NhStatus nh_scan_row(const struct NhScan *scan, size_t index, struct NhScanRow *out);

/**
 * `w_t` and `ν_E` from the scanned series; `Numerical` when either is unavailable.
 *
 * # Safety
 * `scan` must be a live handle; `w_t` and `nu_e` writable.
 */
enum NhStatus nh_scan_winding(const struct NhScan *scan, int64_t *w_t, int64_t *nu_e);

/**
 * Scan CSV text; release with [`nh_string_free`].
 *
 * # Safety
 * `scan` must be a live handle and `out` writable.
 */
enum NhStatus nh_scan_csv(const struct NhScan *scan, char **out);

/**
 * # Safety
 * `scan` must come from [`nh_scan_run`] and not be used afterwards. Null is ignored.
 */
void nh_scan_free(struct NhScan *scan);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void nh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NHTOPO_H */
