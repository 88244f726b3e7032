#ifndef LOCAL_ADJUST_H
#define LOCAL_ADJUST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LaStatus {
  LA_STATUS_OK = 0,
  LA_STATUS_NULL_ARGUMENT = 1,
  LA_STATUS_INVALID_UTF8 = 2,
  LA_STATUS_IO = 3,
  LA_STATUS_PARSE = 4,
  LA_STATUS_UNKNOWN_VARIABLE = 5,
  LA_STATUS_INVALID_CONFIG = 6,
  LA_STATUS_SEARCH = 7,
  LA_STATUS_ESTIMATE = 8,
  LA_STATUS_OUT_OF_RANGE = 9,
  LA_STATUS_NO_ESTIMATE = 10,
  LA_STATUS_PANIC = 99,
} LaStatus;

typedef enum LaVerdict {
  LA_VERDICT_IDENTIFIABLE = 0,
  LA_VERDICT_NO_EFFECT = 10,
  LA_VERDICT_NON_IDENTIFIABLE = 11,
  LA_VERDICT_UNDETERMINED = 12,
} LaVerdict;

/**
 * A loaded CSV dataset.
 */
typedef struct LaDataset LaDataset;

/**
 * A maximal ancestral graph.
 */
typedef struct LaGraph LaGraph;

/**
 * Outcome of one search, with adjustment-set member names kept alive for the
 * handle's lifetime.
 */
typedef struct LaResult LaResult;

typedef struct LaSearchConfig {
  double alpha;
  size_t max_cond;
  size_t max_level;
  bool exhaustive;
  bool widen;
} LaSearchConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *la_last_error(void);

/**
 * Defaults: alpha 0.05, adjacency conditioning cap 3, set-size cap 5.
 */
struct LaSearchConfig la_search_config_default(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LaStatus la_dataset_from_csv(const char *path, struct LaDataset **out);

/**
 * # Safety
 * `data` must be null or a handle from `la_dataset_from_csv`, freed once.
 */
void la_dataset_free(struct LaDataset *data);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum LaStatus la_dataset_shape(const struct LaDataset *data, size_t *rows, size_t *cols);

/**
 * Parses a MAG in the plain-text graph format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LaStatus la_graph_parse(const char *text, struct LaGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle from `la_graph_parse`, freed once.
 */
void la_graph_free(struct LaGraph *graph);

/**
 * Searches with statistical tests on `data`, using every other column as a
 * covariate, and estimates the effect with each adjustment set found.
 *
 * # Safety
 * Handles and strings must be valid; `config` may be null for the defaults.
 */
enum LaStatus la_run_on_data(const struct LaDataset *data,
                             const char *treatment,
                             const char *outcome,
                             const struct LaSearchConfig *config,
                             struct LaResult **out);

/**
 * Searches with m-separation in `graph` as the independence oracle. No effect
 * is estimated.
 *
 * # Safety
 * Handles and strings must be valid; `config` may be null for the defaults.
 */
enum LaStatus la_run_on_graph(const struct LaGraph *graph,
                              const char *treatment,
                              const char *outcome,
                              const struct LaSearchConfig *config,
                              struct LaResult **out);

/**
 * # Safety
 * `result` must be null or a handle from `la_run_on_*`, freed once.
 */
void la_result_free(struct LaResult *result);

/**
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_verdict(const struct LaResult *result, enum LaVerdict *verdict);

/**
 * Average effect over the adjustment sets; `LA_STATUS_NO_ESTIMATE` when there
 * is none.
 *
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_ace(const struct LaResult *result, double *ace);

/**
 * Total number of CI tests performed.
 *
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_ci_tests(const struct LaResult *result, uint64_t *count);

/**
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_set_count(const struct LaResult *result, size_t *count);

/**
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_set_size(const struct LaResult *result, size_t set, size_t *size);

/**
 * Name of member `member` of adjustment set `set`, valid while `result` lives.
 *
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_set_member(const struct LaResult *result,
                                   size_t set,
                                   size_t member,
                                   const char **name);

/**
 * Effect estimated with adjustment set `set`.
 *
 * # Safety
 * `result` must be a live result handle.
 */
enum LaStatus la_result_set_effect(const struct LaResult *result, size_t set, double *effect);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCAL_ADJUST_H */
