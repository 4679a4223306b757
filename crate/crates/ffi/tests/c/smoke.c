#include <math.h>
#include <stdio.h>
#include <string.h>

#include "robust_ineq.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    double a[] = {1.0, 3.0};
    RiSample *s = NULL;
    CHECK(ri_sample_new(a, 2, &s) == RI_STATUS_OK);
    CHECK(ri_sample_len(s) == 2);

    RiEstimate e;
    CHECK(ri_estimate(s, RI_MEASURE_GINI, 0.0, &e) == RI_STATUS_OK);
    CHECK(fabs(e.value - 0.5) < 1e-12);
    CHECK(e.n == 2);

    RiTestResult r;
    CHECK(ri_one_sample_test(s, RI_MEASURE_GINI, 0.0, 4, 0.3, 0.05, RI_ALTERNATIVE_TWO_SIDED, &r) ==
          RI_STATUS_INSUFFICIENT_DATA);
    CHECK(strstr(ri_last_error(), "insufficient") != NULL);
    ri_sample_free(s);

    double x[64], y[64];
    for (int i = 0; i < 64; i++) {
        x[i] = 1.0 + i;
        y[i] = 1.0 + (i % 8);
    }
    RiSample *sx = NULL, *sy = NULL;
    CHECK(ri_sample_new(x, 64, &sx) == RI_STATUS_OK);
    CHECK(ri_sample_new(y, 64, &sy) == RI_STATUS_OK);
    CHECK(ri_two_sample_test(sx, sy, RI_MEASURE_THEIL, 0.0, 4, 4, 0.0, 0.05, RI_ALTERNATIVE_TWO_SIDED, &r) ==
          RI_STATUS_OK);
    CHECK(r.df == 3);
    CHECK(r.validity == RI_VALIDITY_GUARANTEED);
    CHECK(r.p_value > 0.0 && r.p_value <= 1.0);
    CHECK(ri_permutation_test(sx, sy, RI_MEASURE_GINI, 0.0, 0.05, 99, 1, &r) == RI_STATUS_OK);
    CHECK(r.df == -1 && isnan(r.critical_value));

    double theil = 0.0;
    CHECK(ri_sm_theoretical_index(2.8, 1.0, 1.7, RI_MEASURE_THEIL, 0.0, &theil) == RI_STATUS_OK);
    CHECK(theil > 0.0 && theil < 1.0);
    ri_sample_free(sx);
    ri_sample_free(sy);

    printf("%s\n", ri_version());
    return 0;
}
