#include "swarmtrack/metrics.hpp"

#include <doctest.h>

#include <cmath>

using namespace swarmtrack;

namespace {

RunRecord make_record(int T, int n_nodes, const StateVec& error) {
    RunRecord r;
    r.T = T;
    r.n_nodes = n_nodes;
    r.truth.assign(static_cast<std::size_t>(T) + 1, StateVec::Zero());
    r.xhat.assign(static_cast<std::size_t>(T),
                  std::vector<StateVec>(static_cast<std::size_t>(n_nodes), error));
    r.gamma.assign(static_cast<std::size_t>(T),
                   std::vector<int>(static_cast<std::size_t>(n_nodes), 1));
    r.nees.assign(static_cast<std::size_t>(T),
                  std::vector<double>(static_cast<std::size_t>(n_nodes), 0.0));
    r.totals.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        r.totals.sensor_tx[static_cast<std::size_t>(i)] = T;
    }
    return r;
}

}  // namespace

TEST_CASE("rmse_series: exact truth gives an all-zero series") {
    const RunRecord r = make_record(10, 3, StateVec::Zero());
    auto [pos, vel] = rmse_series({r});
    for (double v : pos) {
        CHECK(v == 0.0);
    }
    for (double v : vel) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("rmse_series: constant unit position error gives a constant-1 series") {
    StateVec err = StateVec::Zero();
    err(0) = 1.0;
    const RunRecord r = make_record(8, 1, err);
    auto [pos, vel] = rmse_series({r});
    for (double v : pos) {
        CHECK(v == doctest::Approx(1.0));
    }
    for (double v : vel) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("rmse_series: two runs with errors 0 and 2 give sqrt(2)") {
    const RunRecord a = make_record(5, 1, StateVec::Zero());
    StateVec err = StateVec::Zero();
    err(0) = 2.0;
    const RunRecord b = make_record(5, 1, err);
    auto [pos, vel] = rmse_series({a, b});
    for (double v : pos) {
        CHECK(v == doctest::Approx(std::sqrt(2.0)));
    }
}

TEST_CASE("rmse is invariant under node and run permutation") {
    StateVec e1 = StateVec::Zero();
    e1(1) = 0.5;
    StateVec e2 = StateVec::Zero();
    e2(4) = 1.5;
    RunRecord a = make_record(6, 2, e1);
    RunRecord b = make_record(6, 2, e2);

    auto [pos_ab, vel_ab] = rmse_series({a, b});
    auto [pos_ba, vel_ba] = rmse_series({b, a});
    for (std::size_t k = 0; k < pos_ab.size(); ++k) {
        CHECK(pos_ab[k] == doctest::Approx(pos_ba[k]).epsilon(1e-14));
        CHECK(vel_ab[k] == doctest::Approx(vel_ba[k]).epsilon(1e-14));
    }

    // Swap node columns inside one run.
    RunRecord c = a;
    for (auto& tick : c.xhat) {
        std::swap(tick[0], tick[1]);
    }
    auto [pos_c, vel_c] = rmse_series({c});
    auto [pos_a, vel_a] = rmse_series({a});
    for (std::size_t k = 0; k < pos_a.size(); ++k) {
        CHECK(pos_c[k] == doctest::Approx(pos_a[k]).epsilon(1e-14));
    }
}

TEST_CASE("trigger_rate: full, zero, and counter-exact") {
    RunRecord full = make_record(20, 4, StateVec::Zero());
    auto [tr_full, per_full] = trigger_rate({full});
    CHECK(tr_full == 1.0);
    for (double t : per_full) {
        CHECK(t == 1.0);
    }

    RunRecord none = make_record(20, 4, StateVec::Zero());
    none.totals.resize(4);
    auto [tr_none, per_none] = trigger_rate({none});
    CHECK(tr_none == 0.0);

    RunRecord mixed = make_record(20, 2, StateVec::Zero());
    mixed.totals.sensor_tx = {13, 7};
    auto [tr, per] = trigger_rate({mixed});
    CHECK(tr == static_cast<double>(13 + 7) / (1.0 * 20.0 * 2.0));
    CHECK(per[0] == 13.0 / 20.0);
    CHECK(per[1] == 7.0 / 20.0);
}

TEST_CASE("metrics reject mismatched horizons") {
    const RunRecord a = make_record(5, 2, StateVec::Zero());
    const RunRecord b = make_record(6, 2, StateVec::Zero());
    CHECK_THROWS_AS(rmse_series({a, b}), ConfigError);
    CHECK_THROWS_AS(compute_metrics(std::vector<RunRecord>{}), ConfigError);
}

TEST_CASE("compute_metrics: per-variable means follow the same reduction") {
    StateVec err = StateVec::Zero();
    err(0) = 3.0;
    err(6) = 0.25;
    const RunRecord r = make_record(4, 2, err);
    const RunMetrics m = compute_metrics({r});
    CHECK(m.mean_rmse_per_var(0) == doctest::Approx(3.0));
    CHECK(m.mean_rmse_per_var(1) == doctest::Approx(0.0));
    CHECK(m.mean_rmse_per_var(6) == doctest::Approx(0.25));
    CHECK(m.mean_rmse_pos == doctest::Approx(3.0));
    CHECK(m.trigger_rate == 1.0);
}
