#include "swarmtrack/pipeline.hpp"

#include "swarmtrack/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace swarmtrack;

namespace {

ScenarioConfig small_scenario(int horizon = 60) {
    ScenarioConfig cfg = default_scenario();
    cfg.horizon = horizon;
    cfg.seed = 9;
    return cfg;
}

double max_rel_deviation(const RunRecord& a, const RunRecord& b) {
    REQUIRE(a.T == b.T);
    REQUIRE(a.n_nodes == b.n_nodes);
    double worst = 0.0;
    for (int k = 0; k < a.T; ++k) {
        for (int i = 0; i < a.n_nodes; ++i) {
            const StateVec& xa = a.xhat[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            const StateVec& xb = b.xhat[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            worst = std::max(worst, (xa - xb).norm() / std::max(1e-12, xb.norm()));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (AlgoVariant v : all_variants()) {
        CHECK(parse_variant(variant_name(v)) == v);
    }
    CHECK_THROWS_AS(parse_variant("X-KF"), ConfigError);
}

TEST_CASE("init_network: determinism, non-PD rejection, distinct RNG streams") {
    const ScenarioConfig cfg = small_scenario();
    Network a = init_network(cfg, AlgoVariant::EdcCif);
    Network b = init_network(cfg, AlgoVariant::EdcCif);
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK((a.nodes[i].cif->estimate().xhat - b.nodes[i].cif->estimate().xhat).norm() == 0.0);
    }

    ScenarioConfig bad = cfg;
    bad.initial_cov(0, 0) = -1.0;
    CHECK_THROWS_AS(init_network(bad, AlgoVariant::EdcCif), ConfigError);

    // Per-node RNG substreams differ.
    CHECK(a.nodes[0].comp_rng->raw() != a.nodes[1].comp_rng->raw());
}

TEST_CASE("step_network rejects measurement count mismatches") {
    const ScenarioConfig cfg = small_scenario();
    Network net = init_network(cfg, AlgoVariant::EdcCif);
    std::vector<MeasVec> z(2, MeasVec::Zero());
    CHECK_THROWS_AS(step_network(net, z, 1), ConfigError);
}

TEST_CASE("variant lattice: trigger disabled at delta = 0") {
    ScenarioConfig cfg = small_scenario(80);
    cfg.filter.delta = 0.0;

    const RunRecord ed = run(cfg, AlgoVariant::EdCif);
    const RunRecord d = run(cfg, AlgoVariant::DCif);
    CHECK(max_rel_deviation(ed, d) <= 1e-9);

    const RunRecord edc = run(cfg, AlgoVariant::EdcCif);
    const RunRecord dc = run(cfg, AlgoVariant::DcCif);
    CHECK(max_rel_deviation(edc, dc) <= 1e-9);

    const RunRecord ec = run(cfg, AlgoVariant::EcCkf);
    const RunRecord c = run(cfg, AlgoVariant::CCkf);
    CHECK(max_rel_deviation(ec, c) <= 1e-9);

    // At delta = 0 every measurement transmits.
    CHECK(ed.totals.total_sensor_tx() == 4LL * ed.T);
}

TEST_CASE("single-node graph reduces every variant to its local filter") {
    ScenarioConfig cfg = small_scenario(50);
    cfg.sensors = {cfg.sensors[0]};
    cfg.noise.R = {cfg.noise.R[0]};
    cfg.edges.clear();

    const GroundTruth gt = generate_truth(cfg, 0);
    const CoordinatedTurnModel dyn;

    NodeParams params;
    params.dt = cfg.dt;
    params.Q = cfg.noise.Q;
    params.R = cfg.noise.R[0];
    params.delta = cfg.filter.delta;
    params.scaling = ScalingParams(cfg.filter.sigma1, cfg.filter.sigma2);

    SUBCASE("EDC-CIF equals a standalone ET-CIF node") {
        const RunRecord rec = run(cfg, AlgoVariant::EdcCif);
        params.trigger_enabled = true;
        RangePitchAzimuthModel h(cfg.sensors[0]);
        EtCifNode node({cfg.initial_state, cfg.initial_cov}, &dyn, &h, params);
        RngStream comp(cfg.seed, streams::kCompensationBase + 0, 0);
        for (int k = 1; k <= cfg.horizon; ++k) {
            const StepResult r =
                node.step(gt.measurements[0][static_cast<std::size_t>(k - 1)].vec(), k, &comp);
            const StateVec& got =
                rec.xhat[static_cast<std::size_t>(k - 1)].front();
            CHECK((got - r.posterior.xhat).norm() <= 1e-10 * std::max(1.0, r.posterior.xhat.norm()));
        }
    }

    SUBCASE("EC-CKF equals a standalone ET-CKF node") {
        const RunRecord rec = run(cfg, AlgoVariant::EcCkf);
        params.trigger_enabled = true;
        RangePitchAzimuthModel h(cfg.sensors[0]);
        MomentFilterNode node(MomentKind::Ckf, {cfg.initial_state, cfg.initial_cov}, &dyn, &h,
                              params);
        RngStream comp(cfg.seed, streams::kCompensationBase + 0, 0);
        for (int k = 1; k <= cfg.horizon; ++k) {
            const StepResult r =
                node.step(gt.measurements[0][static_cast<std::size_t>(k - 1)].vec(), k, &comp);
            const StateVec& got =
                rec.xhat[static_cast<std::size_t>(k - 1)].front();
            CHECK((got - r.posterior.xhat).norm() <= 1e-10 * std::max(1.0, r.posterior.xhat.norm()));
        }
    }
}

TEST_CASE("message accounting matches the closed forms") {
    ScenarioConfig cfg = small_scenario(30);

    SUBCASE("diffusion: 2n|N_i| vector scalars per node per tick") {
        const RunRecord rec = run(cfg, AlgoVariant::EdcCif);
        for (int i = 0; i < rec.n_nodes; ++i) {
            CHECK(rec.totals.vec_scalars[static_cast<std::size_t>(i)] ==
                  2LL * kStateDim * 2 * rec.T);
            CHECK(rec.totals.mat_scalars[static_cast<std::size_t>(i)] ==
                  2LL * 28 * 2 * rec.T);
        }
    }

    SUBCASE("consensus: n*L*|N_i| vector scalars per node per tick") {
        for (int L : {1, 5}) {
            cfg.fusion.consensus_L = L;
            const RunRecord rec = run(cfg, AlgoVariant::EcCkf);
            for (int i = 0; i < rec.n_nodes; ++i) {
                CHECK(rec.totals.vec_scalars[static_cast<std::size_t>(i)] ==
                      static_cast<long long>(kStateDim) * L * 2 * rec.T);
            }
        }
    }

    SUBCASE("counter conservation: sensor transmissions equal summed trigger flags") {
        cfg.filter.delta = 0.04;
        const RunRecord rec = run(cfg, AlgoVariant::EdcCif);
        long long flags = 0;
        for (const auto& tick : rec.gamma) {
            for (int g : tick) {
                flags += g;
            }
        }
        CHECK(flags == rec.totals.total_sensor_tx());
    }
}

TEST_CASE("run: determinism, empty horizon, wall-time growth") {
    const ScenarioConfig cfg = small_scenario(40);
    const RunRecord a = run(cfg, AlgoVariant::EdcCif, 2);
    const RunRecord b = run(cfg, AlgoVariant::EdcCif, 2);
    CHECK(max_rel_deviation(a, b) == 0.0);
    CHECK(a.totals.total_sensor_tx() == b.totals.total_sensor_tx());

    ScenarioConfig empty = cfg;
    empty.horizon = 0;
    const RunRecord e = run(empty, AlgoVariant::EdcCif);
    CHECK(e.T == 0);
    CHECK(e.xhat.empty());
    CHECK(e.totals.total_sensor_tx() == 0);

    ScenarioConfig small = cfg;
    small.horizon = 10;
    ScenarioConfig large = cfg;
    large.horizon = 1000;
    const RunRecord quick = run(small, AlgoVariant::EdcCif);
    const RunRecord slow = run(large, AlgoVariant::EdcCif);
    CHECK(slow.wall_seconds > quick.wall_seconds);
}

TEST_CASE("run_ensemble: order-independent of worker scheduling") {
    const ScenarioConfig cfg = small_scenario(20);
    const auto runs = run_ensemble(cfg, AlgoVariant::EdcCif, 4);
    REQUIRE(runs.size() == 4);
    for (int m = 0; m < 4; ++m) {
        const RunRecord direct = run(cfg, AlgoVariant::EdcCif, static_cast<std::uint64_t>(m));
        CHECK(max_rel_deviation(runs[static_cast<std::size_t>(m)], direct) == 0.0);
    }
}

TEST_CASE("fused covariances stay symmetric PD across variants") {
    ScenarioConfig cfg = small_scenario(60);
    for (AlgoVariant v : all_variants()) {
        const RunRecord rec = run(cfg, v);
        CHECK(rec.min_cov_eig > -1e-10);
        CHECK(rec.max_cov_asym < 1e-10);
    }
}
