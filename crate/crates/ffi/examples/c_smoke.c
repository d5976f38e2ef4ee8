/* Minimal C consumer of the groupwalk engine.
 *
 * Build (from the workspace root, after `cargo build -p groupwalk-ffi`):
 *   cc crates/ffi/examples/c_smoke.c -Icrates/ffi/include \
 *      target/debug/libgroupwalk_ffi.a -lm -o c_smoke
 */
#include <assert.h>
#include <stdio.h>

#include "groupwalk.h"

int main(void) {
    GwConfig config = gw_config_default();
    GwEngine *engine = gw_engine_new(&config);
    if (!engine) {
        fprintf(stderr, "engine: %s\n", gw_last_error_message());
        return 1;
    }

    uint32_t labels[4];
    size_t clusters = 0;
    bool event_active = false;
    for (int64_t frame = 0; frame < 40; frame++) {
        double t = (double) frame;
        /* Three walkers moving together, one heading the other way. */
        GwDetection dets[4] = {
            {frame, 1, 2.0 * t, 100.0, 10.0, 20.0},
            {frame, 2, 2.0 * t + 12.0, 100.0, 10.0, 20.0},
            {frame, 3, 2.0 * t + 24.0, 100.0, 10.0, 20.0},
            {frame, 4, 400.0 - 2.0 * t, 300.0, 10.0, 20.0},
        };
        GwStatus status =
            gw_engine_step(engine, frame, dets, 4, labels, &clusters, &event_active);
        if (status != GW_STATUS_OK) {
            fprintf(stderr, "step %lld: %s\n", (long long) frame, gw_last_error_message());
            gw_engine_free(engine);
            return 1;
        }
    }
    printf("clusters=%zu event=%s labels=[%u %u %u %u]\n", clusters,
           event_active ? "active" : "inactive", labels[0], labels[1], labels[2], labels[3]);
    assert(clusters == 2);
    assert(event_active);
    assert(labels[0] == labels[1] && labels[1] == labels[2] && labels[0] != labels[3]);
    gw_engine_free(engine);

    int64_t left[4] = {1, 1, 2, 2};
    int64_t right[4] = {7, 7, -3, -3};
    double score = 0.0;
    assert(gw_ami(left, right, 4, &score) == GW_STATUS_OK);
    printf("ami=%.3f\n", score);
    assert(score == 1.0);

    puts("c_smoke: OK");
    return 0;
}
