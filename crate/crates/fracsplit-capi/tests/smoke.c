/* Minimal consumer of the generated header: parse a config, run a
 * simulation, and read values back through the C ABI. */

#include <stdio.h>
#include <stdlib.h>

#include "fracsplit.h"

static const char *CONFIG =
    "{"
    "\"grid\": {\"extent\": [40.0], \"points\": [64]},"
    "\"kernel\": [{\"sigma\": 1.0, \"beta\": 0.75}],"
    "\"model\": {\"type\": \"fisher\", \"chi\": 1.0},"
    "\"schedule\": {\"h\": 0.173286795139986, \"steps\": 4},"
    "\"initial\": {\"type\": \"constant\", \"values\": [0.5]}"
    "}";

int main(void) {
    FsConfig *cfg = NULL;
    if (fs_config_parse(CONFIG, &cfg) != FsOk) {
        fprintf(stderr, "config: %s\n", fs_last_error_message());
        return 1;
    }

    FsTrajectory *traj = NULL;
    if (fs_simulate(cfg, 0, 0, &traj) != FsOk) {
        fprintf(stderr, "simulate: %s\n", fs_last_error_message());
        return 1;
    }

    size_t count = fs_trajectory_snapshot_count(traj);
    size_t len = fs_trajectory_values_len(traj);
    double t_final = 0.0;
    if (fs_trajectory_time(traj, count - 1, &t_final) != FsOk) {
        return 1;
    }
    double *buf = malloc(len * sizeof(double));
    if (buf == NULL || fs_trajectory_copy_snapshot(traj, count - 1, buf, len) != FsOk) {
        return 1;
    }

    double x = 0.0;
    double g = 0.0;
    if (fs_stable_density(1.0, 1, &x, &g) != FsOk) {
        return 1;
    }
    double tau = 0.0;
    if (fs_tau(0.1, 0.53, 0.03, &tau) != FsOk) {
        return 1;
    }

    printf("snapshots=%zu len=%zu t_final=%.6f u_final=%.9f g1_0=%.9f tau=%.6f\n",
           count, len, t_final, buf[0], g, tau);

    free(buf);
    fs_trajectory_free(traj);
    fs_config_free(cfg);
    return 0;
}
