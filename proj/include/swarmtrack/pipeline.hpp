#pragma once

#include "swarmtrack/estimator.hpp"
#include "swarmtrack/fusion.hpp"
#include "swarmtrack/network.hpp"
#include "swarmtrack/scenario.hpp"

#include <memory>
#include <string>
#include <vector>

namespace swarmtrack {

/// The eight algorithm variants of the study. The name encodes
/// (local filter, event trigger on/off, fusion strategy, CI on/off).
enum class AlgoVariant { CCkf, EcEkf, EcUkf, EcCkf, DCif, DcCif, EdCif, EdcCif };

enum class LocalKind { Ekf, Ukf, Ckf, Cif };
enum class FusionKind { Consensus, DiffusionConvex, DiffusionCi };

struct VariantTraits {
    LocalKind local;
    bool event_triggered;
    FusionKind fusion;
};

VariantTraits variant_traits(AlgoVariant v);
std::string variant_name(AlgoVariant v);
AlgoVariant parse_variant(const std::string& name);
const std::vector<AlgoVariant>& all_variants();

/// Per-node communication meter. vec/mat channels count received
/// estimator-to-estimator scalars (state-vector-sized payloads vs triangular
/// symmetric matrices); sensor_tx counts sensor-to-estimator transmissions.
struct MessageCounter {
    std::vector<long long> sensor_tx;
    std::vector<long long> vec_scalars;
    std::vector<long long> mat_scalars;

    void resize(int n) {
        sensor_tx.assign(static_cast<std::size_t>(n), 0);
        vec_scalars.assign(static_cast<std::size_t>(n), 0);
        mat_scalars.assign(static_cast<std::size_t>(n), 0);
    }
    MessageCounter& operator+=(const MessageCounter& o);
    long long total_sensor_tx() const;
    long long total_vec_scalars() const;
    long long total_mat_scalars() const;
};

/// One node's filter state plus its owned measurement model and RNG stream.
struct NodeRuntime {
    std::unique_ptr<RangePitchAzimuthModel> model;
    std::unique_ptr<EtCifNode> cif;          // set for information-form variants
    std::unique_ptr<MomentFilterNode> moment;  // set for consensus baselines
    std::unique_ptr<RngStream> comp_rng;
};

struct Network {
    ScenarioConfig cfg;
    AlgoVariant variant = AlgoVariant::EdcCif;
    VariantTraits traits{};
    Graph graph{1, {}};
    DiffusionWeights dweights;
    Eigen::MatrixXd consensus_weights;
    CoordinatedTurnModel dynamics;
    std::vector<NodeRuntime> nodes;
};

Network init_network(const ScenarioConfig& cfg, AlgoVariant variant, std::uint64_t run_index = 0);

struct TickOutput {
    std::vector<FusedEstimate> fused;
    std::vector<int> gamma;
    MessageCounter delta;
};

/// Advance the whole network one tick: local phase per node, then the
/// fusion exchange dictated by the variant, overwriting node states with the
/// fused results. Fusion failures abort with tick/node diagnostics.
TickOutput step_network(Network& net, const std::vector<MeasVec>& measurements, int k);

struct RunRecord {
    AlgoVariant variant = AlgoVariant::EdcCif;
    std::uint64_t seed = 0;
    std::uint64_t run_index = 0;
    int T = 0;
    int n_nodes = 0;
    std::vector<StateVec> truth;                 // T+1 states
    std::vector<std::vector<StateVec>> xhat;     // [tick][node] fused estimates
    std::vector<std::vector<int>> gamma;         // [tick][node]
    std::vector<std::vector<double>> trace_P;    // [tick][node]
    std::vector<std::vector<double>> min_eig_P;  // [tick][node]
    std::vector<std::vector<double>> nees;       // [tick][node]
    MessageCounter totals;
    double wall_seconds = 0.0;
    double min_cov_eig = 0.0;  // most negative eigenvalue seen across the run
    double max_cov_asym = 0.0;
};

/// Measurements and poses recorded from real logs, replacing the simulator.
struct ReplayData {
    std::vector<StateVec> truth;                   // T+1
    std::vector<std::vector<MeasVec>> z;           // [node][tick]
    std::vector<std::vector<SensorPose>> poses;    // [node][tick]
};

RunRecord run(const ScenarioConfig& cfg, AlgoVariant variant, std::uint64_t run_index = 0,
              const ReplayData* replay = nullptr);

/// Monte-Carlo ensemble with run indices [0, n_runs). Runs are dispatched
/// over a small worker pool (capped by SWARMTRACK_THREADS) and returned in
/// run-index order regardless of scheduling.
std::vector<RunRecord> run_ensemble(const ScenarioConfig& cfg, AlgoVariant variant, int n_runs);

struct EnsembleResult {
    std::vector<RunRecord> runs;  // completed runs in run-index order
    std::vector<std::pair<int, std::string>> failures;  // (run index, reason)
};

/// Like run_ensemble, but individual run failures (fusion losing positive
/// definiteness) are recorded instead of aborting the whole ensemble.
EnsembleResult run_ensemble_tolerant(const ScenarioConfig& cfg, AlgoVariant variant, int n_runs);

}  // namespace swarmtrack
