#ifndef SBM_VIPS_H
#define SBM_VIPS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Outcome of a call.
typedef enum SbmStatus {
  SBM_STATUS_OK = 0,
  // A required pointer argument was null.
  SBM_STATUS_NULL_POINTER = 1,
  // An argument or configuration value was rejected.
  SBM_STATUS_INVALID_ARGUMENT = 2,
  // A non-finite value or failed estimate stopped the computation.
  SBM_STATUS_NUMERIC = 3,
  // The requested quantity does not exist for this handle (e.g.
  // soft memberships of a spectral result).
  SBM_STATUS_UNAVAILABLE = 4,
  // A bug: the library panicked.
  SBM_STATUS_INTERNAL = 5,
} SbmStatus;

// An SBM graph with its ground-truth labels.
typedef struct SbmGraph SbmGraph;

// The output of one inference run.
typedef struct SbmResult SbmResult;

// Options for the variational runs. Obtain defaults from
// [`sbm_vips_options_default`].
typedef struct SbmVipsOptions {
  double p_hat;
  double q_hat;
  // Prior probability of class 1.
  double pi;
  // Re-estimate `p_hat`, `q_hat` during the run.
  bool update_params;
  // First iteration followed by a parameter update.
  uint32_t param_update_start;
  // Meta iterations for VIPS; MFVI gets three sweeps per meta iteration.
  uint32_t max_meta_iters;
  double tol;
  // Initial memberships are i.i.d. Bernoulli(`init_mu`).
  double init_mu;
} SbmVipsOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *sbm_last_error_message(void);

// Library version as a static nul-terminated string.
const char *sbm_version(void);

// Samples a balanced `k`-class planted-partition graph on `n` nodes
// (within-class probability `p`, across `q`).
//
// # Safety
// `out` must be valid for a pointer write.
enum SbmStatus sbm_graph_generate(size_t n,
                                  size_t k,
                                  double p,
                                  double q,
                                  uint64_t seed,
                                  struct SbmGraph **out);

// Builds a graph from `n_edges` undirected edges given as consecutive
// `(i, j)` node pairs in `edges`, with `n` ground-truth `labels` in
// `0..k`.
//
// # Safety
// `edges` must point to `2 * n_edges` values, `labels` to `n` values and
// `out` must be valid for a pointer write.
enum SbmStatus sbm_graph_from_edges(size_t n,
                                    size_t k,
                                    const uint32_t *edges,
                                    size_t n_edges,
                                    const uint32_t *labels,
                                    struct SbmGraph **out);

// Node count, or 0 for a null graph.
//
// # Safety
// `graph` must be null or a live handle.
size_t sbm_graph_node_count(const struct SbmGraph *graph);

// Undirected edge count, or 0 for a null graph.
//
// # Safety
// `graph` must be null or a live handle.
size_t sbm_graph_edge_count(const struct SbmGraph *graph);

// Copies the ground-truth labels into `buf`, which must hold `len`
// values with `len` equal to the node count.
//
// # Safety
// `graph` must be a live handle and `buf` valid for `len` writes.
enum SbmStatus sbm_graph_labels(const struct SbmGraph *graph, uint32_t *buf, size_t len);

// Releases a graph. Null is ignored.
//
// # Safety
// `graph` must be null or a handle not yet freed.
void sbm_graph_free(struct SbmGraph *graph);

// Defaults: fixed `(p_hat, q_hat)`, `pi = 0.5`, Bernoulli(½) start, at
// most 100 meta iterations, tolerance `1e-6`, updates (if enabled) from
// iteration 3.
struct SbmVipsOptions sbm_vips_options_default(double p_hat, double q_hat);

// Runs two-class VIPS over a random pairing drawn from `pairing_seed`,
// starting from an initialization drawn from `init_seed`.
//
// # Safety
// `graph` and `options` must be live, `out` valid for a pointer write.
enum SbmStatus sbm_run_vips(const struct SbmGraph *graph,
                            const struct SbmVipsOptions *options,
                            uint64_t pairing_seed,
                            uint64_t init_seed,
                            struct SbmResult **out);

// Runs two-class batch mean-field inference with the same options
// (`max_meta_iters` × 3 sweeps).
//
// # Safety
// `graph` and `options` must be live, `out` valid for a pointer write.
enum SbmStatus sbm_run_mfvi(const struct SbmGraph *graph,
                            const struct SbmVipsOptions *options,
                            uint64_t init_seed,
                            struct SbmResult **out);

// Spectral clustering into the graph's class count.
//
// # Safety
// `graph` must be live, `out` valid for a pointer write.
enum SbmStatus sbm_run_spectral(const struct SbmGraph *graph,
                                uint64_t seed,
                                struct SbmResult **out);

// Belief propagation with connectivity `(p, q)` and a uniform prior.
//
// # Safety
// `graph` must be live, `out` valid for a pointer write.
enum SbmStatus sbm_run_bp(const struct SbmGraph *graph,
                          double p,
                          double q,
                          uint64_t seed,
                          struct SbmResult **out);

// Final minimum-permutation ℓ1 error against the graph's labels (NaN for
// a null result).
//
// # Safety
// `result` must be null or a live handle.
double sbm_result_l1_error(const struct SbmResult *result);

// Final NMI against the graph's labels (NaN for a null result).
//
// # Safety
// `result` must be null or a live handle.
double sbm_result_nmi(const struct SbmResult *result);

// Iterations performed (meta iterations for VIPS, sweeps for MFVI and
// BP, eigensolver steps for spectral).
//
// # Safety
// `result` must be null or a live handle.
size_t sbm_result_iterations(const struct SbmResult *result);

// # Safety
// `result` must be null or a live handle.
bool sbm_result_converged(const struct SbmResult *result);

// Final working parameters `(p_hat, q_hat)`; NaN for spectral results.
//
// # Safety
// `result` must be live and both output pointers valid for writes.
enum SbmStatus sbm_result_params(const struct SbmResult *result, double *p_hat, double *q_hat);

// Copies the hard labels (node order) into `buf` of length `len`, which
// must equal the node count.
//
// # Safety
// `result` must be live and `buf` valid for `len` writes.
enum SbmStatus sbm_result_labels(const struct SbmResult *result, uint32_t *buf, size_t len);

// Copies the class-1 probabilities (node order) into `buf`. Only
// variational two-class results carry them; others give
// [`SbmStatus::Unavailable`].
//
// # Safety
// `result` must be live and `buf` valid for `len` writes.
enum SbmStatus sbm_result_membership(const struct SbmResult *result, double *buf, size_t len);

// Releases a result. Null is ignored.
//
// # Safety
// `result` must be null or a handle not yet freed.
void sbm_result_free(struct SbmResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBM_VIPS_H */
