/* Copyright 2026 The prednbv Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Stable C interface to the prednbv engine. Every function returns a status
 * code; on failure prednbv_last_error() describes the problem for the calling
 * thread until its next call into the library.
 */

#ifndef PREDNBV_PREDNBV_H_
#define PREDNBV_PREDNBV_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PREDNBV_API __declspec(dllexport)
#else
#define PREDNBV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum prednbv_status {
  PREDNBV_OK = 0,
  PREDNBV_E_PARAMETER = 1,
  PREDNBV_E_EMPTY_INPUT = 2,
  PREDNBV_E_CARDINALITY = 3,
  PREDNBV_E_DEGENERATE_VIEWPOINT = 4,
  PREDNBV_E_INVALID_POSE = 5,
  PREDNBV_E_BOUNDS = 6,
  PREDNBV_E_INVALID_ENDPOINT = 7,
  PREDNBV_E_NO_PATH = 8,
  PREDNBV_E_ZERO_GAIN = 9,
  PREDNBV_E_PREDICTOR_UNAVAILABLE = 10,
  PREDNBV_E_START_VISIBILITY = 11,
  PREDNBV_E_EXPLORATION_COMPLETE = 12,
  PREDNBV_E_IO = 13,
  PREDNBV_E_PARSE = 14,
  PREDNBV_E_INTERNAL = 99
} prednbv_status;

typedef struct prednbv_cloud prednbv_cloud;
typedef struct prednbv_experiment prednbv_experiment;

PREDNBV_API const char* prednbv_version(void);
PREDNBV_API const char* prednbv_last_error(void);
PREDNBV_API const char* prednbv_status_name(prednbv_status status);

/* "error", "info" or "debug"; anything else is PREDNBV_E_PARAMETER. */
PREDNBV_API prednbv_status prednbv_set_log_level(const char* level);

/* Point clouds. Coordinates are packed x0 y0 z0 x1 y1 z1 ... */
PREDNBV_API prednbv_status prednbv_cloud_create(const double* xyz, size_t count,
                                                prednbv_cloud** out);
/* .ply (ASCII), .xyz or .txt */
PREDNBV_API prednbv_status prednbv_cloud_load(const char* path, prednbv_cloud** out);
PREDNBV_API prednbv_status prednbv_cloud_save(const prednbv_cloud* cloud, const char* path);
PREDNBV_API size_t prednbv_cloud_size(const prednbv_cloud* cloud);
/* Copies min(capacity, size) points into xyz (3 doubles each). */
PREDNBV_API prednbv_status prednbv_cloud_copy(const prednbv_cloud* cloud, double* xyz,
                                              size_t capacity);
PREDNBV_API void prednbv_cloud_free(prednbv_cloud* cloud);

/* Reconstruction metrics as a JSON object {cd_l1, cd_l2, emd, fscore,
 * threshold}. threshold <= 0 picks 1% of the ground-truth bounding-box
 * diagonal. Release the string with prednbv_string_free. */
PREDNBV_API prednbv_status prednbv_metrics_json(const prednbv_cloud* pred,
                                                const prednbv_cloud* gt, double threshold,
                                                char** out_json);
PREDNBV_API void prednbv_string_free(char* s);

/* Writes the ten-scene synthetic suite and an experiment.json into dir. */
PREDNBV_API prednbv_status prednbv_generate_scenes(const char* dir, uint64_t seed);

/* Experiments. A configuration that parses but is unusable (no scenes,
 * unknown method, bad planner values) is PREDNBV_E_PARAMETER. */
PREDNBV_API prednbv_status prednbv_experiment_load(const char* path, prednbv_experiment** out);
PREDNBV_API size_t prednbv_experiment_episode_count(const prednbv_experiment* exp);
/* Runs every episode with up to `jobs` threads. *failures receives the number
 * of scenes or episodes that failed; the call itself still returns
 * PREDNBV_OK when the summary was written. */
PREDNBV_API prednbv_status prednbv_experiment_run(prednbv_experiment* exp, int jobs,
                                                  size_t* failures);
/* Summary CSV of the last run, owned by the experiment. */
PREDNBV_API const char* prednbv_experiment_summary(const prednbv_experiment* exp);
PREDNBV_API void prednbv_experiment_free(prednbv_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif /* PREDNBV_PREDNBV_H_ */
