#include <stdio.h>
#include <stdlib.h>

#include "globenv.h"

int main(void) {
    GeCurveSet *set = NULL;
    if (ge_simulate(20, 20, 0.1, GE_OUTLIER_INTEGRAL, 7, &set) != GE_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", ge_last_error_message());
        return 1;
    }
    size_t s = ge_curveset_num_curves(set);
    size_t d = ge_curveset_num_points(set);

    GeEnvelope *env = NULL;
    if (ge_envelope_new(set, GE_MEASURE_AREA, 0.1, 0.025, &env) != GE_STATUS_OK) {
        fprintf(stderr, "envelope: %s\n", ge_last_error_message());
        return 1;
    }
    double *lower = malloc(d * sizeof(double));
    double *upper = malloc(d * sizeof(double));
    unsigned char *extreme = malloc(s);
    ge_envelope_bounds(env, lower, upper, NULL, d);
    ge_envelope_extreme(env, extreme, s);

    size_t n_extreme = 0;
    for (size_t i = 0; i < s; i++) n_extreme += extreme[i];
    printf("version=%s s=%zu d=%zu crit=%.6f extreme=%zu lower0=%.6f upper0=%.6f\n",
           ge_version(), s, d, ge_envelope_crit(env), n_extreme, lower[0], upper[0]);

    GeCurveSet *bad = NULL;
    GeStatus st = ge_simulate(20, 30, 0.1, GE_OUTLIER_NONE, 7, &bad);
    printf("bad status=%d message=%s\n", (int)st, ge_last_error_message());

    free(lower);
    free(upper);
    free(extreme);
    ge_envelope_free(env);
    ge_curveset_free(set);
    return st == GE_STATUS_INVALID_INPUT ? 0 : 1;
}
