#pragma once

#include "swarmtrack/motion.hpp"
#include "swarmtrack/rng.hpp"
#include "swarmtrack/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace swarmtrack {

/// Process / measurement noise description. Q is symmetric PSD (7x7), each
/// per-sensor R is symmetric PD (3x3).
struct NoiseSpec {
    StateMat Q = StateMat::Zero();
    std::vector<MeasMat> R;

    void validate(std::size_t n_sensors, bool require_pd_r = true) const;
};

struct FilterParams {
    double delta = 0.04;          // send-on-delta trigger threshold
    double sigma1 = 5e-4;         // scaling parameters for the non-triggered bound
    double sigma2 = 5e-4;
    bool compensation = false;    // random-walk compensation of the held measurement
    std::optional<MeasMat> compensation_sigma;  // defaults to R when unset
    MeasVec trigger_weights = MeasVec::Ones();  // per-channel normalization, identity by default
    double ukf_alpha = 1.0;
    double ukf_beta = 2.0;
    double ukf_kappa = 3.0 - kStateDim;
};

struct FusionParams {
    int consensus_L = 5;  // consensus iteration count for the baseline variants
};

struct ScenarioConfig {
    double dt = 0.1;
    int horizon = 200;
    StateVec initial_state = StateVec::Zero();
    StateMat initial_cov = StateMat::Identity();
    std::vector<SensorPose> sensors;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    std::vector<std::pair<int, int>> edges;
    bool sample_initial_state = true;  // draw x0 ~ N(initial_state, initial_cov) per run
    FilterParams filter;
    FusionParams fusion;

    void validate(bool require_pd_r = true) const;
};

struct GroundTruth {
    std::vector<StateVec> states;                      // horizon + 1 entries
    std::vector<std::vector<Measurement>> measurements;  // [sensor][k], horizon entries
};

/// One coordinated-turn step, optionally with process noise w ~ N(0, Q).
StateVec propagate_state(const StateVec& x, double dt, RngStream* rng, const StateMat& Q);

/// Range/pitch/azimuth observation, optionally with noise v ~ N(0, R).
/// The azimuth is re-wrapped to (-pi, pi] after adding noise.
Measurement observe(const StateVec& x, const SensorPose& pose, RngStream* rng, const MeasMat& R);

/// Simulate the target for cfg.horizon steps and record per-sensor noisy
/// measurements. Deterministic in (cfg.seed, run_index); distinct runs and
/// sensors use disjoint RNG substreams.
GroundTruth generate_truth(const ScenarioConfig& cfg, std::uint64_t run_index = 0);

/// Symmetric PSD square root (for sampling from a covariance).
StateMat psd_sqrt(const StateMat& m);
MeasMat psd_sqrt_meas(const MeasMat& m);

/// Built-in desk-scale tracking scenario: four sensors on the corners of a
/// 100 m square, target on an ascending circular path, ring topology.
ScenarioConfig default_scenario();

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);
ScenarioConfig scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioConfig& cfg);

/// FNV-1a hash of the canonical JSON form, embedded in outputs for provenance.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace swarmtrack
