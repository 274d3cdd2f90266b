#ifndef TOPOCL_H
#define TOPOCL_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TopoclStatus {
  TOPOCL_STATUS_OK = 0,
  TOPOCL_STATUS_NULL_POINTER = 1,
  TOPOCL_STATUS_INVALID_ARGUMENT = 2,
  TOPOCL_STATUS_DISCONNECTED_GRAPH = 3,
  TOPOCL_STATUS_CARDINALITY_MISMATCH = 4,
  TOPOCL_STATUS_SHAPE_MISMATCH = 5,
  TOPOCL_STATUS_IO = 6,
  TOPOCL_STATUS_FORMAT = 7,
  TOPOCL_STATUS_BUFFER_TOO_SMALL = 8,
  TOPOCL_STATUS_PANIC = 9,
} TopoclStatus;

/**
 * Birth and death sets of a graph.
 */
typedef struct TopoclDescriptor TopoclDescriptor;

/**
 * Weighted undirected graph.
 */
typedef struct TopoclGraph TopoclGraph;

/**
 * Multilayer perceptron.
 */
typedef struct TopoclMlp TopoclMlp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent call on this thread if it failed, or null. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *topocl_last_error(void);

/**
 * Builds a connected simple graph on `node_count` nodes from parallel edge
 * arrays. Fails with `DisconnectedGraph` when it is not connected.
 *
 * # Safety
 * `src`, `dst` and `weights` must each point to `edge_count` readable values.
 */
enum TopoclStatus topocl_graph_new(size_t node_count,
                                   const size_t *src,
                                   const size_t *dst,
                                   const double *weights,
                                   size_t edge_count,
                                   struct TopoclGraph **out);

/**
 * # Safety
 * `graph` must come from [`topocl_graph_new`] and not be freed already.
 */
void topocl_graph_free(struct TopoclGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null.
 */
size_t topocl_graph_edge_count(const struct TopoclGraph *graph);

/**
 * Splits the edges of a graph into births and deaths.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum TopoclStatus topocl_decompose(const struct TopoclGraph *graph, struct TopoclDescriptor **out);

/**
 * # Safety
 * `desc` must come from [`topocl_decompose`] and not be freed already.
 */
void topocl_descriptor_free(struct TopoclDescriptor *desc);

/**
 * # Safety
 * `desc` must be a live handle or null.
 */
size_t topocl_descriptor_birth_count(const struct TopoclDescriptor *desc);

/**
 * # Safety
 * `desc` must be a live handle or null.
 */
size_t topocl_descriptor_death_count(const struct TopoclDescriptor *desc);

/**
 * Copies birth values (ascending) and, if `edge_ids` is not null, their
 * edge ids.
 *
 * # Safety
 * `values` and a non-null `edge_ids` must hold `len` elements.
 */
enum TopoclStatus topocl_descriptor_births(const struct TopoclDescriptor *desc,
                                           double *values,
                                           size_t *edge_ids,
                                           size_t len);

/**
 * Copies death values (ascending) and, if `edge_ids` is not null, their
 * edge ids.
 *
 * # Safety
 * `values` and a non-null `edge_ids` must hold `len` elements.
 */
enum TopoclStatus topocl_descriptor_deaths(const struct TopoclDescriptor *desc,
                                           double *values,
                                           size_t *edge_ids,
                                           size_t len);

/**
 * Squared cycle distance between two death sets of equal length.
 *
 * # Safety
 * `a` and `b` must hold `len` values; `out` must be writable.
 */
enum TopoclStatus topocl_distance(const double *a, const double *b, size_t len, double *out);

/**
 * Gradient of the squared distance to `target` for every edge, indexed by
 * edge id. `grad` must hold at least the graph's edge count.
 *
 * # Safety
 * `target` must hold `target_len` values and `grad` `grad_len` values.
 */
enum TopoclStatus topocl_gradient(const struct TopoclDescriptor *desc,
                                  const double *target,
                                  size_t target_len,
                                  double *grad,
                                  size_t grad_len);

/**
 * Weighted barycenter of `set_count` sorted death sets stored row-major in
 * `sets`, each of length `len`. Writes `len` values to `out`.
 *
 * # Safety
 * `sets` must hold `set_count * len` values, `weights` `set_count` and
 * `out` `len`.
 */
enum TopoclStatus topocl_barycenter(const double *sets,
                                    size_t set_count,
                                    size_t len,
                                    const double *weights,
                                    double *out);

/**
 * Online update `(p * prev + q * next) / (p + q)`, written to `out`.
 *
 * # Safety
 * `prev`, `next` and `out` must hold `len` values.
 */
enum TopoclStatus topocl_barycenter_update(const double *prev,
                                           const double *next,
                                           size_t len,
                                           double p,
                                           double q,
                                           double *out);

/**
 * Freshly initialised network with the given layer sizes.
 *
 * # Safety
 * `sizes` must hold `layer_count` values and `out` be writable.
 */
enum TopoclStatus topocl_mlp_new(const size_t *sizes,
                                 size_t layer_count,
                                 uint64_t seed,
                                 struct TopoclMlp **out);

/**
 * Loads a checkpoint written by `topocl_mlp_save` or the Rust library.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum TopoclStatus topocl_mlp_load(const char *path, struct TopoclMlp **out);

/**
 * # Safety
 * `mlp` must be a live handle and `path` a NUL-terminated string.
 */
enum TopoclStatus topocl_mlp_save(const struct TopoclMlp *mlp, const char *path);

/**
 * # Safety
 * `mlp` must come from `topocl_mlp_new` or `topocl_mlp_load`.
 */
void topocl_mlp_free(struct TopoclMlp *mlp);

/**
 * # Safety
 * `mlp` must be a live handle or null.
 */
size_t topocl_mlp_input_dim(const struct TopoclMlp *mlp);

/**
 * # Safety
 * `mlp` must be a live handle or null.
 */
size_t topocl_mlp_output_dim(const struct TopoclMlp *mlp);

/**
 * Predicted class for each of `rows` inputs stored row-major in `inputs`.
 *
 * # Safety
 * `inputs` must hold `rows * input_dim` values and `labels` `rows`.
 */
enum TopoclStatus topocl_mlp_predict(const struct TopoclMlp *mlp,
                                     const float *inputs,
                                     size_t rows,
                                     size_t *labels);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPOCL_H */
