/* C interface to the groupwalk group-motion analytics engine. */

#ifndef GROUPWALK_H
#define GROUPWALK_H

/* Generated by cbindgen from groupwalk-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a groupwalk call.
 */
typedef enum GwStatus {
  GW_STATUS_OK = 0,
  GW_STATUS_NULL_POINTER = 1,
  GW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed per-frame input: duplicate ids, non-monotonic frames,
   * non-positive boxes.
   */
  GW_STATUS_FORMAT_ERROR = 3,
  /**
   * Numeric failure inside the pipeline (singular covariance,
   * eigensolver breakdown).
   */
  GW_STATUS_NUMERIC_ERROR = 4,
  GW_STATUS_INTERNAL_ERROR = 5,
} GwStatus;

/**
 * Opaque engine handle.
 */
typedef struct GwEngine GwEngine;

/**
 * Engine configuration; obtain defaults from [`gw_config_default`].
 */
typedef struct GwConfig {
  /**
   * Similarity scaling slope.
   */
  double a;
  /**
   * Similarity scaling offset.
   */
  double b;
  /**
   * Measurement noise variance.
   */
  double meas_noise;
  /**
   * Process noise variance on position/size components.
   */
  double proc_noise_pos;
  /**
   * Process noise variance on flow components.
   */
  double proc_noise_vel;
  /**
   * Initial covariance of position/size components for new tracks.
   */
  double init_cov_pos;
  /**
   * Initial covariance of flow components for new tracks.
   */
  double init_cov_vel;
  /**
   * Eigengap threshold coefficient.
   */
  double eigengap_coeff;
  /**
   * Seed for the k-means stage.
   */
  uint64_t kmeans_seed;
  /**
   * Drop tracks unseen for more than this many frames.
   */
  uint32_t max_gap;
} GwConfig;

/**
 * One detected bounding box handed to the engine.
 */
typedef struct GwDetection {
  int64_t frame;
  uint64_t id;
  double x;
  double y;
  double w;
  double h;
} GwDetection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default engine configuration.
 */
struct GwConfig gw_config_default(void);

/**
 * Creates an engine. Returns NULL on invalid configuration; the reason
 * is available through [`gw_last_error_message`].
 *
 * # Safety
 * `config` must be NULL or point to a valid [`GwConfig`].
 */
struct GwEngine *gw_engine_new(const struct GwConfig *config);

/**
 * Destroys an engine created by [`gw_engine_new`]. NULL is a no-op.
 *
 * # Safety
 * `engine` must be NULL or a pointer returned by [`gw_engine_new`] that
 * has not been freed yet.
 */
void gw_engine_free(struct GwEngine *engine);

/**
 * Feeds one frame of detections through the engine.
 *
 * Frames must strictly ascend across calls. On success writes the
 * cluster label of `detections[i]` (1-based, `1..=*out_cluster_count`)
 * into `out_labels[i]`, the selected cluster count into
 * `out_cluster_count`, and whether any cluster holds three or more
 * tracks into `out_event_active`.
 *
 * # Safety
 * `engine` must be a live engine handle; `detections` must point to
 * `n_detections` elements (NULL is allowed when `n_detections` is 0);
 * `out_labels` must have room for `n_detections` elements (NULL allowed
 * when `n_detections` is 0); `out_cluster_count` and `out_event_active`
 * must be valid for writes.
 */
enum GwStatus gw_engine_step(struct GwEngine *engine,
                             int64_t frame,
                             const struct GwDetection *detections,
                             size_t n_detections,
                             uint32_t *out_labels,
                             size_t *out_cluster_count,
                             bool *out_event_active);

/**
 * Adjusted Mutual Information between two labelings of the same `len`
 * items. Labels are arbitrary integers; `len` must be at least 1.
 *
 * # Safety
 * `labels_a` and `labels_b` must point to `len` elements each and
 * `out_score` must be valid for a write.
 */
enum GwStatus gw_ami(const int64_t *labels_a,
                     const int64_t *labels_b,
                     size_t len,
                     double *out_score);

/**
 * Message describing the most recent failure on this thread, or an
 * empty string. The pointer stays valid until the next groupwalk call
 * on the same thread; do not free it.
 */
const char *gw_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GROUPWALK_H */
