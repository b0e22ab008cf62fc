#include "hazode.h"
#include <math.h>
#include <stdio.h>

#define CHECK(call)                                             \
    do {                                                        \
        HazodeStatus s_ = (call);                               \
        if (s_ != HAZODE_STATUS_OK) {                           \
            char msg[256];                                      \
            hazode_last_error(msg, sizeof msg);                 \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, msg);  \
            return 1;                                           \
        }                                                       \
    } while (0)

int main(void) {
    HazodeModel *m = NULL;
    CHECK(hazode_model_from_kv("model = constant\nc = 0.6\n", &m));

    double value = 0.0;
    uint8_t divergent = 0;
    CHECK(hazode_mgf(m, 0.3, &value, &divergent));
    if (divergent || fabs(value - 2.0) > 1e-6) return 2;

    HazodeDataset *d = NULL;
    CHECK(hazode_simulate(m, 100, 5.0, 7, &d));
    if (hazode_dataset_len(d) != 100) return 3;
    double ll = 0.0;
    CHECK(hazode_log_likelihood(m, d, &ll));

    HazodeModel *bad = NULL;
    if (hazode_model_from_kv("model = constant\nc = -1\n", &bad) != HAZODE_STATUS_CONFIG) return 4;
    if (bad != NULL) return 5;

    hazode_dataset_free(d);
    hazode_model_free(m);
    printf("ok %.6f\n", ll);
    return 0;
}
