#ifndef COMMWEIGHTS_H
#define COMMWEIGHTS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CwStatus {
  CW_STATUS_OK = 0,
  /**
   * Null pointer, malformed string or out-of-range parameter.
   */
  CW_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The graph is not connected.
   */
  CW_STATUS_DISCONNECTED = 2,
  /**
   * No finite worst case exists for any candidate (e.g. `W` does not
   * reach consensus).
   */
  CW_STATUS_INFEASIBLE = 3,
  /**
   * The SDP solver failed.
   */
  CW_STATUS_SOLVER = 4,
  /**
   * Malformed JSON or schema violation.
   */
  CW_STATUS_PARSE = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  CW_STATUS_PANIC = 6,
} CwStatus;

/**
 * Values for [`CwSetting::algorithm`].
 */
typedef enum CwAlgorithm {
  CW_ALGORITHM_DIGING = 0,
  CW_ALGORITHM_ATC_DIGING = 1,
  CW_ALGORITHM_EXTRA = 2,
} CwAlgorithm;

/**
 * Values for [`CwSetting::criterion`].
 */
typedef enum CwCriterion {
  CW_CRITERION_RATE = 0,
  CW_CRITERION_FUNCTIONAL_AT_MEAN = 1,
} CwCriterion;

typedef enum CwPepStatus {
  CW_PEP_STATUS_OPTIMAL = 0,
  CW_PEP_STATUS_LOW_ACCURACY = 1,
  CW_PEP_STATUS_UNBOUNDED = 2,
  CW_PEP_STATUS_NOT_CONSENSUAL = 3,
} CwPepStatus;

/**
 * Opaque graph handle.
 */
typedef struct CwGraph CwGraph;

/**
 * Opaque averaging-matrix handle.
 */
typedef struct CwWeights CwWeights;

/**
 * Problem setting. `algorithm` and `criterion` hold [`CwAlgorithm`] and
 * [`CwCriterion`] values; fill with [`cw_setting_default`] first.
 */
typedef struct CwSetting {
  int algorithm;
  int criterion;
  size_t k;
  double mu;
  double l;
  double tracking_weight;
  /**
   * Negative disables the bound.
   */
  double heterogeneity_bound;
  double tol;
  size_t max_iter;
} CwSetting;

typedef struct CwEvaluation {
  /**
   * Worst-case value; `+inf` when unbounded or not consensual.
   */
  double value;
  /**
   * Rate for the rate criterion, NaN otherwise.
   */
  double rho;
  double tau;
  enum CwPepStatus status;
  size_t iterations;
} CwEvaluation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next `cw_*` call on the same thread.
 */
const char *cw_last_error_message(void);

/**
 * Builds `complete`, `star`, `cycle` or `grid` on `n` nodes.
 *
 * # Safety
 * `topology` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CwStatus cw_graph_topology(const char *topology, size_t n, struct CwGraph **out);

/**
 * Builds a graph from `m` edges stored as `2m` node indices.
 *
 * # Safety
 * `edges` must point to `2 * m` readable values (or be NULL when `m == 0`).
 */
enum CwStatus cw_graph_from_edges(size_t n, const size_t *edges, size_t m, struct CwGraph **out);

/**
 * Parses graph JSON (`{"n": .., "edges": [[i, j], ..]}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CwStatus cw_graph_from_json(const char *json, struct CwGraph **out);

/**
 * Serializes a graph to JSON. Release the string with [`cw_string_free`].
 *
 * # Safety
 * `g` must be a live graph handle and `out` a valid pointer.
 */
enum CwStatus cw_graph_to_json(const struct CwGraph *g, char **out);

/**
 * # Safety
 * `g` must be a live graph handle or NULL.
 */
size_t cw_graph_node_count(const struct CwGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle or NULL.
 */
size_t cw_graph_edge_count(const struct CwGraph *g);

/**
 * # Safety
 * `g` must come from a `cw_graph_*` constructor and not be used afterwards.
 */
void cw_graph_free(struct CwGraph *g);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void cw_string_free(char *s);

/**
 * Runs a heuristic by label (`metropolis`, `min-slem`, ...) with default
 * parameters.
 *
 * # Safety
 * `g` must be a live graph handle, `name` a NUL-terminated string and `out`
 * a valid pointer.
 */
enum CwStatus cw_weights_heuristic(const struct CwGraph *g,
                                   const char *name,
                                   struct CwWeights **out);

/**
 * Wraps explicit edge weights, one per edge in the graph's edge order.
 *
 * # Safety
 * `g` must be a live graph handle and `w` must point to `m` readable values.
 */
enum CwStatus cw_weights_from_values(const struct CwGraph *g,
                                     const double *w,
                                     size_t m,
                                     struct CwWeights **out);

/**
 * Copies the edge weights into `buf`, which must hold exactly `len` values.
 *
 * # Safety
 * `w` must be a live weights handle and `buf` must point to `len` writable
 * values.
 */
enum CwStatus cw_weights_get(const struct CwWeights *w, double *buf, size_t len);

/**
 * # Safety
 * `w` must be a live weights handle or NULL.
 */
size_t cw_weights_len(const struct CwWeights *w);

/**
 * Second-largest eigenvalue modulus of `W`.
 *
 * # Safety
 * `w` must be a live weights handle and `out` a valid pointer.
 */
enum CwStatus cw_weights_slem(const struct CwWeights *w, double *out);

/**
 * # Safety
 * `w` must come from a `cw_weights_*` constructor and not be used afterwards.
 */
void cw_weights_free(struct CwWeights *w);

/**
 * Fills `out` with the library defaults for an algorithm and criterion
 * (`K = 1`, `mu = 0.1`, `L = 1`).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CwStatus cw_setting_default(enum CwAlgorithm algorithm,
                                 enum CwCriterion criterion,
                                 struct CwSetting *out);

/**
 * Worst-case value of the setting at `(W, alpha)`.
 *
 * # Safety
 * `w` must be a live weights handle; `setting` and `out` valid pointers.
 */
enum CwStatus cw_evaluate(const struct CwWeights *w,
                          const struct CwSetting *setting,
                          double alpha,
                          struct CwEvaluation *out);

/**
 * Tunes the step size for fixed weights over the default grid.
 *
 * # Safety
 * `w` must be a live weights handle; `setting`, `alpha` and `value` valid
 * pointers.
 */
enum CwStatus cw_tune_alpha(const struct CwWeights *w,
                            const struct CwSetting *setting,
                            double *alpha,
                            double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMWEIGHTS_H */
