#include "swarmtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarmtrack {

namespace {

void check_aligned(const std::vector<RunRecord>& runs) {
    if (runs.empty()) {
        throw ConfigError("metrics: at least one run is required");
    }
    for (const RunRecord& r : runs) {
        if (r.T != runs.front().T || r.n_nodes != runs.front().n_nodes) {
            throw ConfigError("metrics: runs have mismatched horizons or node counts");
        }
    }
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> rmse_series(const std::vector<RunRecord>& runs) {
    check_aligned(runs);
    const int T = runs.front().T;
    const int n = runs.front().n_nodes;
    const double mc = static_cast<double>(runs.size());

    std::vector<double> pos(static_cast<std::size_t>(T), 0.0);
    std::vector<double> vel(static_cast<std::size_t>(T), 0.0);
    for (int k = 0; k < T; ++k) {
        double pos_sum = 0.0;
        double vel_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            double pos_ms = 0.0;
            double vel_ms = 0.0;
            for (const RunRecord& r : runs) {
                const StateVec err = r.xhat[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] -
                                     r.truth[static_cast<std::size_t>(k + 1)];
                pos_ms += err.head<3>().squaredNorm();
                vel_ms += err.segment<3>(3).squaredNorm();
            }
            pos_sum += std::sqrt(pos_ms / mc);
            vel_sum += std::sqrt(vel_ms / mc);
        }
        pos[static_cast<std::size_t>(k)] = pos_sum / n;
        vel[static_cast<std::size_t>(k)] = vel_sum / n;
    }
    return {pos, vel};
}

std::pair<double, std::vector<double>> trigger_rate(const std::vector<RunRecord>& runs) {
    check_aligned(runs);
    const int T = runs.front().T;
    const int n = runs.front().n_nodes;
    if (T == 0) {
        return {0.0, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    }

    std::vector<long long> tx(static_cast<std::size_t>(n), 0);
    long long total = 0;
    for (const RunRecord& r : runs) {
        for (int i = 0; i < n; ++i) {
            tx[static_cast<std::size_t>(i)] += r.totals.sensor_tx[static_cast<std::size_t>(i)];
            total += r.totals.sensor_tx[static_cast<std::size_t>(i)];
        }
    }
    const double denom = static_cast<double>(runs.size()) * static_cast<double>(T);
    std::vector<double> per_node(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        per_node[static_cast<std::size_t>(i)] = static_cast<double>(tx[static_cast<std::size_t>(i)]) / denom;
    }
    const double tr = static_cast<double>(total) / (denom * static_cast<double>(n));
    return {tr, per_node};
}

RunMetrics compute_metrics(const std::vector<RunRecord>& runs) {
    check_aligned(runs);
    RunMetrics m;
    m.runs = static_cast<int>(runs.size());
    m.T = runs.front().T;
    m.n_nodes = runs.front().n_nodes;

    auto [pos, vel] = rmse_series(runs);
    m.rmse_pos = std::move(pos);
    m.rmse_vel = std::move(vel);

    const double mc = static_cast<double>(runs.size());
    const int T = m.T;
    const int n = m.n_nodes;

    // Per-variable series use the same MC-RMS -> node-mean -> time-mean
    // reduction as the position/velocity formulas.
    m.mean_rmse_per_var = StateVec::Zero();
    m.mean_nees.assign(static_cast<std::size_t>(T), 0.0);
    for (int k = 0; k < T; ++k) {
        StateVec node_sum = StateVec::Zero();
        double nees_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            StateVec ms = StateVec::Zero();
            for (const RunRecord& r : runs) {
                const StateVec err = r.xhat[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] -
                                     r.truth[static_cast<std::size_t>(k + 1)];
                ms += err.cwiseAbs2();
                nees_sum += r.nees[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            }
            node_sum += (ms / mc).cwiseSqrt();
        }
        m.mean_rmse_per_var += node_sum / n;
        m.mean_nees[static_cast<std::size_t>(k)] = nees_sum / (mc * n);
    }
    if (T > 0) {
        m.mean_rmse_per_var /= static_cast<double>(T);
        double p = 0.0;
        double v = 0.0;
        for (int k = 0; k < T; ++k) {
            p += m.rmse_pos[static_cast<std::size_t>(k)];
            v += m.rmse_vel[static_cast<std::size_t>(k)];
        }
        m.mean_rmse_pos = p / T;
        m.mean_rmse_vel = v / T;
    }

    auto [tr, per_node] = trigger_rate(runs);
    m.trigger_rate = tr;
    m.trigger_rate_per_node = std::move(per_node);

    m.min_cov_eig = std::numeric_limits<double>::infinity();
    m.max_cov_asym = 0.0;
    for (const RunRecord& r : runs) {
        m.sensor_tx_total += r.totals.total_sensor_tx();
        m.vec_scalars_total += r.totals.total_vec_scalars();
        m.mat_scalars_total += r.totals.total_mat_scalars();
        m.wall_seconds_total += r.wall_seconds;
        m.min_cov_eig = std::min(m.min_cov_eig, r.min_cov_eig);
        m.max_cov_asym = std::max(m.max_cov_asym, r.max_cov_asym);
    }
    return m;
}

}  // namespace swarmtrack
