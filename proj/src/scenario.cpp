#include "swarmtrack/scenario.hpp"

#include <cmath>
#include <string>

namespace swarmtrack {

namespace {

template <int N>
void check_noise_matrix(const Eigen::Matrix<double, N, N>& m, bool require_pd,
                        const std::string& name) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw ConfigError(std::string(name) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(m, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (require_pd ? (min_eig <= 0.0) : (min_eig < -1e-12 * std::max(1.0, m.norm()))) {
        throw ConfigError(std::string(name) + (require_pd ? " must be positive definite"
                                                          : " must be positive semidefinite"));
    }
}

}  // namespace

StateMat psd_sqrt(const StateMat& m) { return detail::psd_matrix_sqrt<kStateDim>(m, "psd_sqrt"); }
MeasMat psd_sqrt_meas(const MeasMat& m) { return detail::psd_matrix_sqrt<kMeasDim>(m, "psd_sqrt"); }

void NoiseSpec::validate(std::size_t n_sensors, bool require_pd_r) const {
    check_noise_matrix<kStateDim>(Q, false, "noise.q");
    if (R.size() != n_sensors) {
        throw ConfigError("noise.r must list one 3x3 covariance per sensor");
    }
    for (std::size_t i = 0; i < R.size(); ++i) {
        check_noise_matrix<kMeasDim>(R[i], require_pd_r, "noise.r[" + std::to_string(i) + "]");
    }
}

void ScenarioConfig::validate(bool require_pd_r) const {
    if (dt <= 0.0) {
        throw ConfigError("dt must be positive");
    }
    if (horizon < 1) {
        throw ConfigError("horizon must be at least 1");
    }
    if (sensors.empty()) {
        throw ConfigError("at least one sensor is required");
    }
    if (!initial_state.allFinite() || !initial_cov.allFinite()) {
        throw ConfigError("initial state/covariance must be finite");
    }
    check_noise_matrix<kStateDim>(initial_cov, true, "initial_cov");
    noise.validate(sensors.size(), require_pd_r);
    const int n = static_cast<int>(sensors.size());
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw ConfigError("topology edge index out of range");
        }
        if (a == b) {
            throw ConfigError("topology self-loops are not allowed");
        }
    }
    if (filter.delta < 0.0) {
        throw ConfigError("filter.delta must be nonnegative");
    }
    if (filter.sigma1 <= 0.0 || filter.sigma2 <= 0.0) {
        throw ConfigError("filter.sigma1 and filter.sigma2 must be positive");
    }
    if (fusion.consensus_L < 1) {
        throw ConfigError("fusion.consensus_L must be at least 1");
    }
}

StateVec propagate_state(const StateVec& x, double dt, RngStream* rng, const StateMat& Q) {
    if (dt <= 0.0) {
        throw FilterError("propagate_state: dt must be positive");
    }
    StateVec out = coordinated_turn_step(x, dt);
    if (rng != nullptr) {
        const StateMat sq = psd_sqrt(Q);
        StateVec g;
        for (int i = 0; i < kStateDim; ++i) {
            g(i) = rng->gaussian();
        }
        out += sq * g;
    }
    return out;
}

Measurement observe(const StateVec& x, const SensorPose& pose, RngStream* rng, const MeasMat& R) {
    Measurement z = observe_exact(x, pose);
    if (rng != nullptr) {
        const MeasMat sq = psd_sqrt_meas(R);
        MeasVec g;
        for (int i = 0; i < kMeasDim; ++i) {
            g(i) = rng->gaussian();
        }
        const MeasVec noisy = z.vec() + sq * g;
        z.r = noisy(0);
        z.phi = noisy(1);
        z.rho = wrap_angle(noisy(2));
    }
    return z;
}

GroundTruth generate_truth(const ScenarioConfig& cfg, std::uint64_t run_index) {
    // The simulator only samples from R, so the exact noiseless limit (R = 0)
    // is allowed here; the filters still demand PD measurement noise.
    cfg.validate(false);
    const std::size_t n_sensors = cfg.sensors.size();
    const int T = cfg.horizon;

    GroundTruth gt;
    gt.states.reserve(static_cast<std::size_t>(T) + 1);
    gt.measurements.assign(n_sensors, {});
    for (auto& seq : gt.measurements) {
        seq.reserve(static_cast<std::size_t>(T));
    }

    StateVec x0 = cfg.initial_state;
    if (cfg.sample_initial_state) {
        RngStream init_rng(cfg.seed, streams::kInitialState, run_index);
        const StateMat sq = psd_sqrt(cfg.initial_cov);
        StateVec g;
        for (int i = 0; i < kStateDim; ++i) {
            g(i) = init_rng.gaussian();
        }
        x0 += sq * g;
    }
    gt.states.push_back(x0);

    RngStream proc_rng(cfg.seed, streams::kProcessNoise, run_index);
    const StateMat q_sqrt = psd_sqrt(cfg.noise.Q);
    std::vector<RngStream> meas_rngs;
    std::vector<MeasMat> r_sqrts;
    meas_rngs.reserve(n_sensors);
    r_sqrts.reserve(n_sensors);
    for (std::size_t i = 0; i < n_sensors; ++i) {
        meas_rngs.emplace_back(cfg.seed, streams::kMeasurementNoiseBase + i, run_index);
        r_sqrts.push_back(psd_sqrt_meas(cfg.noise.R[i]));
    }

    for (int k = 1; k <= T; ++k) {
        StateVec x = coordinated_turn_step(gt.states.back(), cfg.dt);
        StateVec g;
        for (int i = 0; i < kStateDim; ++i) {
            g(i) = proc_rng.gaussian();
        }
        x += q_sqrt * g;
        gt.states.push_back(x);

        for (std::size_t i = 0; i < n_sensors; ++i) {
            Measurement z = observe_exact(x, cfg.sensors[i]);
            MeasVec gv;
            for (int c = 0; c < kMeasDim; ++c) {
                gv(c) = meas_rngs[i].gaussian();
            }
            const MeasVec noisy = z.vec() + r_sqrts[i] * gv;
            z.r = noisy(0);
            z.phi = noisy(1);
            z.rho = wrap_angle(noisy(2));
            gt.measurements[i].push_back(z);
        }
    }
    return gt;
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.dt = 0.1;
    cfg.horizon = 200;
    cfg.seed = 1;

    // Ascending circle of radius 10 m around (50, 50). The diffuse prior and
    // range-dominated noise put the send-on-delta trigger in its interesting
    // regime at the default threshold.
    cfg.initial_state << 70.0, 50.0, 5.0, 0.0, 1.2, 0.2, 0.12;
    StateVec p0;
    p0 << 400.0, 400.0, 64.0, 9.0, 9.0, 9.0, 0.25;
    cfg.initial_cov = p0.asDiagonal();

    // Corners of a 100 m square, two of them elevated for vertical geometry.
    cfg.sensors = {SensorPose{0.0, 0.0, 0.0}, SensorPose{100.0, 0.0, 12.0},
                   SensorPose{100.0, 100.0, 0.0}, SensorPose{0.0, 100.0, 12.0}};
    cfg.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};

    StateVec q;
    q << 1e-4, 1e-4, 1e-4, 1e-3, 1e-3, 1e-3, 1e-4;
    cfg.noise.Q = q.asDiagonal();
    MeasVec r;
    r << 0.08 * 0.08, 0.03 * 0.03, 0.03 * 0.03;
    cfg.noise.R.assign(cfg.sensors.size(), MeasMat(r.asDiagonal()));
    return cfg;
}

}  // namespace swarmtrack
