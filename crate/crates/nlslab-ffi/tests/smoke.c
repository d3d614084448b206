#include <math.h>
#include <stdio.h>
#include "nlslab.h"

int main(void) {
    NlsGeometry *g = NULL;
    if (nlslab_geometry_new(1, NULL, 1.0, &g) != NLS_STATUS_OK) return 1;
    size_t len = nlslab_field_len(g, 3);
    double re[7] = {0}, im[7] = {0};
    re[5] = 0.4;
    im[1] = 0.3;
    NlsField *f = NULL;
    if (len != 7 || nlslab_field_new(g, 3, re, im, len, &f) != NLS_STATUS_OK) return 2;
    NlsEvaluator *ev = NULL;
    if (nlslab_evaluator_new(f, 1.0, 0.5, 4.0, true, &ev) != NLS_STATUS_OK) return 3;
    NlsEnergyReport r;
    if (nlslab_energy_report(ev, f, &r) != NLS_STATUS_OK) return 4;
    if (nlslab_geometry_new(5, NULL, 1.0, &g) != NLS_STATUS_INVALID_ARGUMENT) return 5;
    if (nlslab_last_error() == NULL) return 6;
    NlsBudget b;
    if (nlslab_gwp_budget(2, 0.6, 100.0, 0.0, 0.1, 0.0, &b) != NLS_STATUS_OK) return 7;
    if (fabs(b.total_existence_exponent) > 1e-12) return 8;
    nlslab_evaluator_free(ev);
    nlslab_field_free(f);
    nlslab_geometry_free(g);
    printf("ok mass=%g e_i2=%g\n", r.mass, r.e_i2);
    return 0;
}
