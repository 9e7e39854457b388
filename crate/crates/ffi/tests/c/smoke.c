#include <stdio.h>
#include <stdlib.h>
#include <math.h>
#include "starflow.h"

int main(void) {
    StarflowShape *shape = NULL;
    if (starflow_shape_new("round", 1.0, 0.0, 1, 64, &shape) != STARFLOW_STATUS_OK) {
        fprintf(stderr, "shape: %s\n", starflow_last_error());
        return 1;
    }
    StarflowFlowConfig cfg = starflow_flow_config_default();
    cfg.t_end = 0.1;
    StarflowSeries *series = NULL;
    if (starflow_flow_run(shape, &cfg, &series) != STARFLOW_STATUS_OK) {
        fprintf(stderr, "run: %s\n", starflow_last_error());
        return 1;
    }
    double t = 0.0;
    starflow_series_final_time(series, &t);
    StarflowTermination term;
    starflow_series_termination(series, &term);
    printf("final_t=%.6f termination=%d\n", t, (int)term);

    StarflowShape *bad = NULL;
    StarflowStatus s = starflow_shape_new("flower", 0.9, 5.0, 1, 64, &bad);
    printf("bad=%d null=%d msg=%s\n", (int)s, bad == NULL, starflow_last_error());

    starflow_series_free(series);
    starflow_shape_free(shape);
    return fabs(t - 0.1) < 1e-12 && term == STARFLOW_TERMINATION_REACHED_T_END
        && s == STARFLOW_STATUS_NOT_STAR_SHAPED ? 0 : 1;
}
