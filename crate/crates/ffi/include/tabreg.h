#ifndef TABREG_H
#define TABREG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of feature columns every dataset and prediction matrix carries.
 */
#define TABREG_N_FEATURES 16

/**
 * Number of percentile levels in [`TabregColumnSummary`] (1, 5, 10, 25, 50, 75, 90, 95, 99).
 */
#define TABREG_N_PERCENTILES 9

typedef enum TabregStatus {
  TABREG_STATUS_OK = 0,
  TABREG_STATUS_NULL_POINTER = 1,
  TABREG_STATUS_INVALID_UTF8 = 2,
  TABREG_STATUS_IO = 3,
  TABREG_STATUS_SCHEMA = 4,
  TABREG_STATUS_PARSE = 5,
  TABREG_STATUS_EMPTY_DATA = 6,
  TABREG_STATUS_INVALID_CONFIG = 7,
  TABREG_STATUS_DIMENSION_MISMATCH = 8,
  TABREG_STATUS_NUMERIC = 9,
  TABREG_STATUS_UNSUPPORTED = 10,
  TABREG_STATUS_PANIC = 11,
} TabregStatus;

typedef enum TabregMetric {
  TABREG_METRIC_R_SQUARED = 0,
  TABREG_METRIC_MAE = 1,
  TABREG_METRIC_RMSE = 2,
} TabregMetric;

/**
 * A loaded, cleaned dataset.
 */
typedef struct TabregDataset TabregDataset;

/**
 * A fitted model together with the feature scaler it was trained behind.
 */
typedef struct TabregModel TabregModel;

typedef struct TabregColumnSummary {
  size_t count;
  double mean;
  double std;
  double min;
  double max;
  /**
   * Values at the levels 1, 5, 10, 25, 50, 75, 90, 95, 99.
   */
  double percentiles[TABREG_N_PERCENTILES];
} TabregColumnSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *tabreg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tabreg_version(void);

/**
 * Loads a CSV, dropping rows with missing cells.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TabregStatus tabreg_dataset_load_csv(const char *path, struct TabregDataset **out);

/**
 * Builds a dataset from a row-major `n_rows x TABREG_N_FEATURES` matrix
 * and `n_rows` targets.
 *
 * # Safety
 * `features` must hold `n_rows * n_cols` values, `target` `n_rows` values.
 */
enum TabregStatus tabreg_dataset_from_arrays(const double *features,
                                             size_t n_rows,
                                             size_t n_cols,
                                             const double *target,
                                             struct TabregDataset **out);

/**
 * # Safety
 * `dataset` must be a live handle or NULL; it is invalid afterwards.
 */
void tabreg_dataset_free(struct TabregDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
enum TabregStatus tabreg_dataset_n_rows(const struct TabregDataset *dataset, size_t *out);

/**
 * Summary statistics of one column (any feature or `score`).
 *
 * # Safety
 * `dataset` must be a live handle, `column` a NUL-terminated string and
 * `out` writable.
 */
enum TabregStatus tabreg_dataset_describe(const struct TabregDataset *dataset,
                                          const char *column,
                                          struct TabregColumnSummary *out);

/**
 * Fits a model on every row of `dataset`.
 *
 * `config_json` is a model configuration object such as
 * `{"family":"KNN","k":5}`, or a bare family name such as `"gb"`.
 * Scale-sensitive families are trained behind a z-score scaler.
 *
 * # Safety
 * `dataset` must be a live handle, `config_json` a NUL-terminated string
 * and `out` writable.
 */
enum TabregStatus tabreg_model_fit(const struct TabregDataset *dataset,
                                   const char *config_json,
                                   uint64_t seed,
                                   struct TabregModel **out);

/**
 * Predicts `n_rows` rows of a row-major `n_rows x n_cols` matrix into `out`.
 *
 * # Safety
 * `features` must hold `n_rows * n_cols` values and `out` room for `n_rows`.
 */
enum TabregStatus tabreg_model_predict(const struct TabregModel *model,
                                       const double *features,
                                       size_t n_rows,
                                       size_t n_cols,
                                       double *out);

/**
 * Display name of the model family; valid while the handle lives.
 *
 * # Safety
 * `model` must be a live handle or NULL.
 */
const char *tabreg_model_name(const struct TabregModel *model);

/**
 * # Safety
 * `model` must be a live handle or NULL; it is invalid afterwards.
 */
void tabreg_model_free(struct TabregModel *model);

/**
 * Computes `metric` over two length-`n` vectors.
 *
 * # Safety
 * `y_true` and `y_pred` must hold `n` values; `out` must be writable.
 */
enum TabregStatus tabreg_metric(enum TabregMetric metric,
                                const double *y_true,
                                const double *y_pred,
                                size_t n,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TABREG_H */
