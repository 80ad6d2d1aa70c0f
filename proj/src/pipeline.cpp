#include "swarmtrack/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

namespace swarmtrack {

VariantTraits variant_traits(AlgoVariant v) {
    switch (v) {
        case AlgoVariant::CCkf:
            return {LocalKind::Ckf, false, FusionKind::Consensus};
        case AlgoVariant::EcEkf:
            return {LocalKind::Ekf, true, FusionKind::Consensus};
        case AlgoVariant::EcUkf:
            return {LocalKind::Ukf, true, FusionKind::Consensus};
        case AlgoVariant::EcCkf:
            return {LocalKind::Ckf, true, FusionKind::Consensus};
        case AlgoVariant::DCif:
            return {LocalKind::Cif, false, FusionKind::DiffusionConvex};
        case AlgoVariant::DcCif:
            return {LocalKind::Cif, false, FusionKind::DiffusionCi};
        case AlgoVariant::EdCif:
            return {LocalKind::Cif, true, FusionKind::DiffusionConvex};
        case AlgoVariant::EdcCif:
            return {LocalKind::Cif, true, FusionKind::DiffusionCi};
    }
    throw ConfigError("unknown algorithm variant");
}

std::string variant_name(AlgoVariant v) {
    switch (v) {
        case AlgoVariant::CCkf: return "C-CKF";
        case AlgoVariant::EcEkf: return "EC-EKF";
        case AlgoVariant::EcUkf: return "EC-UKF";
        case AlgoVariant::EcCkf: return "EC-CKF";
        case AlgoVariant::DCif: return "D-CIF";
        case AlgoVariant::DcCif: return "DC-CIF";
        case AlgoVariant::EdCif: return "ED-CIF";
        case AlgoVariant::EdcCif: return "EDC-CIF";
    }
    return "?";
}

AlgoVariant parse_variant(const std::string& name) {
    for (AlgoVariant v : all_variants()) {
        if (variant_name(v) == name) {
            return v;
        }
    }
    throw ConfigError("unknown algorithm variant: " + name +
                      " (expected one of C-CKF, EC-EKF, EC-UKF, EC-CKF, D-CIF, DC-CIF, ED-CIF, "
                      "EDC-CIF)");
}

const std::vector<AlgoVariant>& all_variants() {
    static const std::vector<AlgoVariant> v = {
        AlgoVariant::CCkf, AlgoVariant::EcEkf, AlgoVariant::EcUkf, AlgoVariant::EcCkf,
        AlgoVariant::DCif, AlgoVariant::DcCif, AlgoVariant::EdCif, AlgoVariant::EdcCif};
    return v;
}

MessageCounter& MessageCounter::operator+=(const MessageCounter& o) {
    if (sensor_tx.size() != o.sensor_tx.size()) {
        resize(static_cast<int>(o.sensor_tx.size()));
    }
    for (std::size_t i = 0; i < sensor_tx.size(); ++i) {
        sensor_tx[i] += o.sensor_tx[i];
        vec_scalars[i] += o.vec_scalars[i];
        mat_scalars[i] += o.mat_scalars[i];
    }
    return *this;
}

long long MessageCounter::total_sensor_tx() const {
    return std::accumulate(sensor_tx.begin(), sensor_tx.end(), 0LL);
}
long long MessageCounter::total_vec_scalars() const {
    return std::accumulate(vec_scalars.begin(), vec_scalars.end(), 0LL);
}
long long MessageCounter::total_mat_scalars() const {
    return std::accumulate(mat_scalars.begin(), mat_scalars.end(), 0LL);
}

Network init_network(const ScenarioConfig& cfg, AlgoVariant variant, std::uint64_t run_index) {
    cfg.validate();
    Network net;
    net.cfg = cfg;
    net.variant = variant;
    net.traits = variant_traits(variant);
    net.graph = Graph(static_cast<int>(cfg.sensors.size()), cfg.edges);
    net.dweights = diffusion_weights(net.graph);
    net.consensus_weights = metropolis_weights(net.graph);

    const EstimatePair init{cfg.initial_state, symmetrized(cfg.initial_cov)};
    net.nodes.resize(cfg.sensors.size());
    for (std::size_t i = 0; i < cfg.sensors.size(); ++i) {
        NodeRuntime& nr = net.nodes[i];
        nr.model = std::make_unique<RangePitchAzimuthModel>(cfg.sensors[i]);
        nr.comp_rng = std::make_unique<RngStream>(cfg.seed, streams::kCompensationBase + i, run_index);

        NodeParams params;
        params.dt = cfg.dt;
        params.Q = cfg.noise.Q;
        params.R = cfg.noise.R[i];
        params.delta = cfg.filter.delta;
        params.scaling = ScalingParams(cfg.filter.sigma1, cfg.filter.sigma2);
        params.trigger_enabled = net.traits.event_triggered;
        params.compensation.enabled = cfg.filter.compensation;
        params.compensation.Sigma =
            cfg.filter.compensation_sigma.value_or(cfg.noise.R[i]);
        params.trigger_weights = cfg.filter.trigger_weights;
        params.ukf = UkfParams{cfg.filter.ukf_alpha, cfg.filter.ukf_beta, cfg.filter.ukf_kappa};

        if (net.traits.local == LocalKind::Cif) {
            nr.cif = std::make_unique<EtCifNode>(init, &net.dynamics, nr.model.get(), params);
        } else {
            const MomentKind kind = net.traits.local == LocalKind::Ekf   ? MomentKind::Ekf
                                    : net.traits.local == LocalKind::Ukf ? MomentKind::Ukf
                                                                         : MomentKind::Ckf;
            nr.moment = std::make_unique<MomentFilterNode>(kind, init, &net.dynamics,
                                                           nr.model.get(), params);
        }
    }
    return net;
}

namespace {

constexpr long long kVecScalars = kStateDim;
constexpr long long kMatScalars = kStateDim * (kStateDim + 1) / 2;

std::vector<double> weight_row(const Eigen::MatrixXd& C, const Graph& g, int i) {
    std::vector<double> w;
    w.push_back(C(i, i));
    for (int j : g.neighbors(i)) {
        w.push_back(C(i, j));
    }
    return w;
}

}  // namespace

TickOutput step_network(Network& net, const std::vector<MeasVec>& measurements, int k) {
    const int n = net.graph.size();
    if (static_cast<int>(measurements.size()) != n) {
        throw ConfigError("step_network: one measurement per node is required");
    }

    TickOutput out;
    out.fused.resize(static_cast<std::size_t>(n));
    out.gamma.assign(static_cast<std::size_t>(n), 1);
    out.delta.resize(n);

    if (net.traits.fusion == FusionKind::Consensus) {
        std::vector<InfoPair> pairs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            StepResult r = net.nodes[static_cast<std::size_t>(i)].moment->step(
                measurements[static_cast<std::size_t>(i)], k,
                net.nodes[static_cast<std::size_t>(i)].comp_rng.get());
            pairs[static_cast<std::size_t>(i)] = r.posterior_info;
            out.gamma[static_cast<std::size_t>(i)] = r.gamma;
            out.delta.sensor_tx[static_cast<std::size_t>(i)] += r.gamma;
        }
        ConsensusConfig ccfg{net.cfg.fusion.consensus_L, net.consensus_weights};
        std::vector<InfoPair> fused =
            consensus_fuse(pairs, net.graph, ccfg, &out.delta.vec_scalars, &out.delta.mat_scalars);
        for (int i = 0; i < n; ++i) {
            EstimatePair est;
            try {
                est = from_info(fused[static_cast<std::size_t>(i)]);
            } catch (const FilterError& e) {
                std::ostringstream msg;
                msg << "consensus fusion failed at tick " << k << ", node " << i << ": " << e.what()
                    << " (min eigenvalue " << min_eigenvalue(fused[static_cast<std::size_t>(i)].Y)
                    << ")";
                throw FusionError(msg.str());
            }
            net.nodes[static_cast<std::size_t>(i)].moment->set_state(est);
            out.fused[static_cast<std::size_t>(i)] =
                FusedEstimate{est.xhat, est.P, fused[static_cast<std::size_t>(i)].yhat,
                              fused[static_cast<std::size_t>(i)].Y};
        }
        return out;
    }

    // Diffusion variants: local phase, adaptation exchange, combination.
    std::vector<StepResult> locals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        locals[static_cast<std::size_t>(i)] = net.nodes[static_cast<std::size_t>(i)].cif->local_phase(
            measurements[static_cast<std::size_t>(i)], k,
            net.nodes[static_cast<std::size_t>(i)].comp_rng.get());
        out.gamma[static_cast<std::size_t>(i)] = locals[static_cast<std::size_t>(i)].gamma;
        out.delta.sensor_tx[static_cast<std::size_t>(i)] +=
            locals[static_cast<std::size_t>(i)].gamma;
    }

    std::vector<EstimatePair> adapted(static_cast<std::size_t>(n));
    std::vector<InfoPair> adapted_info(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<InfoContribution> nbr_contribs;
        for (int j : net.graph.neighbors(i)) {
            nbr_contribs.push_back(locals[static_cast<std::size_t>(j)].contrib);
        }
        out.delta.vec_scalars[static_cast<std::size_t>(i)] += kVecScalars * net.graph.degree(i);
        out.delta.mat_scalars[static_cast<std::size_t>(i)] += kMatScalars * net.graph.degree(i);
        try {
            adapted_info[static_cast<std::size_t>(i)] =
                diffuse_adapt(locals[static_cast<std::size_t>(i)].prior_info,
                              locals[static_cast<std::size_t>(i)].contrib, nbr_contribs);
            adapted[static_cast<std::size_t>(i)] =
                from_info(adapted_info[static_cast<std::size_t>(i)]);
        } catch (const std::runtime_error& e) {
            std::ostringstream msg;
            msg << "diffusion adaptation failed at tick " << k << ", node " << i << ": "
                << e.what();
            throw FusionError(msg.str());
        }
    }

    for (int i = 0; i < n; ++i) {
        std::vector<EstimatePair> pairs;
        pairs.push_back(adapted[static_cast<std::size_t>(i)]);
        for (int j : net.graph.neighbors(i)) {
            pairs.push_back(adapted[static_cast<std::size_t>(j)]);
        }
        const std::vector<double> w = weight_row(net.dweights.C, net.graph, i);
        out.delta.vec_scalars[static_cast<std::size_t>(i)] += kVecScalars * net.graph.degree(i);
        out.delta.mat_scalars[static_cast<std::size_t>(i)] += kMatScalars * net.graph.degree(i);

        FusedEstimate f;
        try {
            f = (net.traits.fusion == FusionKind::DiffusionCi) ? ci_combine(pairs, w)
                                                               : diffuse_combine_convex(pairs, w);
        } catch (const std::runtime_error& e) {
            std::ostringstream msg;
            msg << "diffusion combination failed at tick " << k << ", node " << i << ": "
                << e.what();
            throw FusionError(msg.str());
        }
        out.fused[static_cast<std::size_t>(i)] = f;
    }
    for (int i = 0; i < n; ++i) {
        const FusedEstimate& f = out.fused[static_cast<std::size_t>(i)];
        net.nodes[static_cast<std::size_t>(i)].cif->commit(InfoPair{f.yhat_fus, f.Y_fus},
                                                           EstimatePair{f.xhat_fus, f.P_fus});
    }
    return out;
}

RunRecord run(const ScenarioConfig& cfg, AlgoVariant variant, std::uint64_t run_index,
              const ReplayData* replay) {
    RunRecord rec;
    rec.variant = variant;
    rec.seed = cfg.seed;
    rec.run_index = run_index;
    rec.n_nodes = static_cast<int>(cfg.sensors.size());
    rec.min_cov_eig = std::numeric_limits<double>::infinity();
    if (cfg.horizon == 0 && replay == nullptr) {
        rec.totals.resize(rec.n_nodes);
        return rec;
    }

    const auto t_start = std::chrono::steady_clock::now();

    std::vector<std::vector<MeasVec>> z;  // [node][tick]
    if (replay != nullptr) {
        rec.truth = replay->truth;
        z = replay->z;
    } else {
        const GroundTruth gt = generate_truth(cfg, run_index);
        rec.truth = gt.states;
        z.resize(cfg.sensors.size());
        for (std::size_t i = 0; i < cfg.sensors.size(); ++i) {
            z[i].reserve(gt.measurements[i].size());
            for (const Measurement& m : gt.measurements[i]) {
                z[i].push_back(m.vec());
            }
        }
    }
    const int T = static_cast<int>(z.empty() ? 0 : z.front().size());
    rec.T = T;

    ScenarioConfig run_cfg = cfg;
    run_cfg.horizon = std::max(1, T);
    Network net = init_network(run_cfg, variant, run_index);
    const int n = net.graph.size();

    rec.xhat.resize(static_cast<std::size_t>(T));
    rec.gamma.resize(static_cast<std::size_t>(T));
    rec.trace_P.resize(static_cast<std::size_t>(T));
    rec.min_eig_P.resize(static_cast<std::size_t>(T));
    rec.nees.resize(static_cast<std::size_t>(T));
    rec.totals.resize(n);

    std::vector<MeasVec> zk(static_cast<std::size_t>(n));
    for (int k = 1; k <= T; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k - 1);
        for (int i = 0; i < n; ++i) {
            zk[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)][kk];
            if (replay != nullptr) {
                net.nodes[static_cast<std::size_t>(i)].model->set_pose(
                    replay->poses[static_cast<std::size_t>(i)][kk]);
            }
        }
        const TickOutput tick = step_network(net, zk, k);
        rec.totals += tick.delta;

        rec.xhat[kk].resize(static_cast<std::size_t>(n));
        rec.gamma[kk] = tick.gamma;
        rec.trace_P[kk].resize(static_cast<std::size_t>(n));
        rec.min_eig_P[kk].resize(static_cast<std::size_t>(n));
        rec.nees[kk].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const FusedEstimate& f = tick.fused[static_cast<std::size_t>(i)];
            rec.xhat[kk][static_cast<std::size_t>(i)] = f.xhat_fus;
            rec.trace_P[kk][static_cast<std::size_t>(i)] = f.P_fus.trace();
            const double me = min_eigenvalue(f.P_fus);
            rec.min_eig_P[kk][static_cast<std::size_t>(i)] = me;
            rec.min_cov_eig = std::min(rec.min_cov_eig, me);
            rec.max_cov_asym = std::max(rec.max_cov_asym, max_asymmetry(f.P_fus));
            const StateVec err = f.xhat_fus - rec.truth[static_cast<std::size_t>(k)];
            rec.nees[kk][static_cast<std::size_t>(i)] = err.dot(f.Y_fus * err);
        }
    }

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
}

namespace {

int worker_count(int n_runs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    if (const char* env = std::getenv("SWARMTRACK_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) {
            hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
        }
    }
    return std::max(1, std::min<int>(static_cast<int>(hw), n_runs));
}

}  // namespace

EnsembleResult run_ensemble_tolerant(const ScenarioConfig& cfg, AlgoVariant variant, int n_runs) {
    if (n_runs < 1) {
        throw ConfigError("run_ensemble: at least one run is required");
    }
    std::vector<std::optional<RunRecord>> slots(static_cast<std::size_t>(n_runs));
    std::vector<std::pair<int, std::string>> failures;
    std::mutex failures_mutex;

    const auto work_one = [&](int m) {
        try {
            slots[static_cast<std::size_t>(m)] = run(cfg, variant, static_cast<std::uint64_t>(m));
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failures_mutex);
            failures.emplace_back(m, e.what());
        }
    };

    const int workers = worker_count(n_runs);
    if (workers == 1) {
        for (int m = 0; m < n_runs; ++m) {
            work_one(m);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int m = next.fetch_add(1);
                    if (m >= n_runs) {
                        return;
                    }
                    work_one(m);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    EnsembleResult out;
    for (auto& slot : slots) {
        if (slot.has_value()) {
            out.runs.push_back(std::move(*slot));
        }
    }
    out.failures = std::move(failures);
    std::sort(out.failures.begin(), out.failures.end());
    return out;
}

std::vector<RunRecord> run_ensemble(const ScenarioConfig& cfg, AlgoVariant variant, int n_runs) {
    EnsembleResult res = run_ensemble_tolerant(cfg, variant, n_runs);
    if (!res.failures.empty()) {
        throw FusionError("run " + std::to_string(res.failures.front().first) + ": " +
                          res.failures.front().second);
    }
    return std::move(res.runs);
}

}  // namespace swarmtrack
