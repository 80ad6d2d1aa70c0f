#pragma once

#include "swarmtrack/pipeline.hpp"

#include <vector>

namespace swarmtrack {

/// Ensemble statistics over a set of aligned Monte-Carlo runs.
struct RunMetrics {
    std::vector<double> rmse_pos;  // per tick, MC-RMS then node mean
    std::vector<double> rmse_vel;
    std::vector<double> mean_nees;        // per tick, node+run mean
    StateVec mean_rmse_per_var = StateVec::Zero();  // time mean of the per-variable series
    double mean_rmse_pos = 0.0;           // time means of the series above
    double mean_rmse_vel = 0.0;
    double trigger_rate = 0.0;            // fraction in [0, 1]
    std::vector<double> trigger_rate_per_node;
    long long sensor_tx_total = 0;
    long long vec_scalars_total = 0;
    long long mat_scalars_total = 0;
    double wall_seconds_total = 0.0;
    double min_cov_eig = 0.0;
    double max_cov_asym = 0.0;
    int runs = 0;
    int T = 0;
    int n_nodes = 0;
};

/// Per-tick position / velocity RMSE series (the full reduction lives in
/// compute_metrics; this returns just the two series).
std::pair<std::vector<double>, std::vector<double>> rmse_series(const std::vector<RunRecord>& runs);

/// Average trigger rate and its per-node breakdown, computed from the
/// integer transmission totals so they agree exactly with the counters.
std::pair<double, std::vector<double>> trigger_rate(const std::vector<RunRecord>& runs);

RunMetrics compute_metrics(const std::vector<RunRecord>& runs);

}  // namespace swarmtrack
