#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "sbm_vips.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        enum SbmStatus s_ = (call);                                              \
        if (s_ != SBM_STATUS_OK) {                                               \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,              \
                    sbm_last_error_message());                                   \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    struct SbmGraph *graph = NULL;
    CHECK(sbm_graph_generate(400, 2, 0.2, 0.02, 7, &graph));
    size_t n = sbm_graph_node_count(graph);

    struct SbmVipsOptions opts = sbm_vips_options_default(0.2, 0.02);
    struct SbmResult *result = NULL;
    CHECK(sbm_run_vips(graph, &opts, 1, 2, &result));

    double *u = malloc(n * sizeof(double));
    CHECK(sbm_result_membership(result, u, n));
    double p_hat, q_hat;
    CHECK(sbm_result_params(result, &p_hat, &q_hat));
    printf("n=%zu nmi=%.4f l1=%.4f p=%.3f q=%.3f u0=%.3f\n", n, sbm_result_nmi(result),
           sbm_result_l1_error(result), p_hat, q_hat, u[0]);

    if (sbm_run_vips(NULL, &opts, 1, 2, &result) != SBM_STATUS_NULL_POINTER) return 2;
    if (sbm_last_error_message() == NULL) return 3;

    int ok = sbm_result_nmi(result) > 0.99;
    free(u);
    sbm_result_free(result);
    sbm_graph_free(graph);
    return ok ? 0 : 4;
}
