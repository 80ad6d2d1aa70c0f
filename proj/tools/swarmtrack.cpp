// Command-line front end: scenario execution, variant comparison sweeps,
// trajectory-log ingestion, and metric export.

#include "swarmtrack/metrics.hpp"
#include "swarmtrack/pipeline.hpp"
#include "swarmtrack/scenario.hpp"
#include "swarmtrack/trajio.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swarmtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stod(item));
        }
    }
    if (out.empty()) {
        throw ConfigError("empty sweep list");
    }
    return out;
}

// Rebuild the sensor ring for a different node count: evenly spaced on the
// circle through the default corners, alternating elevations.
void resize_network(ScenarioConfig& cfg, int n) {
    if (n < 1) {
        throw ConfigError("--nodes must be at least 1");
    }
    const MeasMat r = cfg.noise.R.empty() ? MeasMat::Identity() : cfg.noise.R.front();
    cfg.sensors.clear();
    const double radius = 50.0 * std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
        const double a = -3.0 * M_PI / 4.0 + 2.0 * M_PI * i / n;
        cfg.sensors.push_back(SensorPose{50.0 + radius * std::cos(a),
                                         50.0 + radius * std::sin(a),
                                         (i % 2 == 1) ? 12.0 : 0.0});
    }
    cfg.noise.R.assign(static_cast<std::size_t>(n), r);
    cfg.edges.clear();
    for (int i = 0; i + 1 < n; ++i) {
        cfg.edges.emplace_back(i, i + 1);
    }
    if (n > 2) {
        cfg.edges.emplace_back(n - 1, 0);
    }
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> consensus_l;
    std::optional<int> nodes;
};

ScenarioConfig load_config(const CommonOpts& opts) {
    ScenarioConfig cfg =
        opts.config_path.empty() ? default_scenario() : load_scenario(opts.config_path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
    }
    if (opts.consensus_l) {
        cfg.fusion.consensus_L = *opts.consensus_l;
    }
    if (opts.nodes) {
        resize_network(cfg, *opts.nodes);
    }
    cfg.validate();
    return cfg;
}

void write_run_csv(const fs::path& path, const RunRecord& rec, const std::string& hash) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << "# swarmtrack run variant=" << variant_name(rec.variant) << " seed=" << rec.seed
        << " run=" << rec.run_index << " nodes=" << rec.n_nodes << " T=" << rec.T
        << " config_hash=" << hash << "\n";
    out << "k,node,xhat_x,xhat_y,xhat_z,xhat_vx,xhat_vy,xhat_vz,xhat_omega,"
           "truth_x,truth_y,truth_z,truth_vx,truth_vy,truth_vz,truth_omega,"
           "gamma,trace_P,min_eig_P,nees,cum_sensor_tx,cum_vec_scalars,cum_mat_scalars\n";
    std::vector<long long> cum_tx(static_cast<std::size_t>(rec.n_nodes), 0);
    std::vector<long long> cum_vec(static_cast<std::size_t>(rec.n_nodes), 0);
    std::vector<long long> cum_mat(static_cast<std::size_t>(rec.n_nodes), 0);
    char buf[768];
    for (int k = 1; k <= rec.T; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k - 1);
        for (int i = 0; i < rec.n_nodes; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            cum_tx[ii] += rec.gamma[kk][ii];
            // Estimator-to-estimator volumes are identical every tick, so the
            // running total is the per-tick share of the final count.
            cum_vec[ii] = rec.totals.vec_scalars[ii] / rec.T * k;
            cum_mat[ii] = rec.totals.mat_scalars[ii] / rec.T * k;
            const StateVec& x = rec.xhat[kk][ii];
            const StateVec& t = rec.truth[static_cast<std::size_t>(k)];
            std::snprintf(buf, sizeof(buf),
                          "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                          "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                          "%d,%.17g,%.17g,%.17g,%lld,%lld,%lld\n",
                          k, i, x(0), x(1), x(2), x(3), x(4), x(5), x(6), t(0), t(1), t(2), t(3),
                          t(4), t(5), t(6), rec.gamma[kk][ii], rec.trace_P[kk][ii],
                          rec.min_eig_P[kk][ii], rec.nees[kk][ii], cum_tx[ii], cum_vec[ii],
                          cum_mat[ii]);
            out << buf;
        }
    }
}

RunRecord read_run_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    RunRecord rec;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# swarmtrack run", 0) != 0) {
        throw ParseError(path.string() + ": not a swarmtrack run CSV");
    }
    {
        std::istringstream hs(line);
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "variant") rec.variant = parse_variant(val);
            if (key == "seed") rec.seed = std::stoull(val);
            if (key == "run") rec.run_index = std::stoull(val);
            if (key == "nodes") rec.n_nodes = std::stoi(val);
            if (key == "T") rec.T = std::stoi(val);
        }
    }
    if (rec.T < 0 || rec.n_nodes < 1) {
        throw ParseError(path.string() + ": bad header");
    }
    std::getline(in, line);  // column header

    rec.truth.assign(static_cast<std::size_t>(rec.T) + 1, StateVec::Zero());
    rec.xhat.assign(static_cast<std::size_t>(rec.T),
                    std::vector<StateVec>(static_cast<std::size_t>(rec.n_nodes)));
    rec.gamma.assign(static_cast<std::size_t>(rec.T),
                     std::vector<int>(static_cast<std::size_t>(rec.n_nodes), 0));
    rec.trace_P.assign(static_cast<std::size_t>(rec.T),
                       std::vector<double>(static_cast<std::size_t>(rec.n_nodes), 0.0));
    rec.min_eig_P = rec.trace_P;
    rec.nees = rec.trace_P;
    rec.totals.resize(rec.n_nodes);
    rec.min_cov_eig = std::numeric_limits<double>::infinity();

    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int k = 0;
        int node = 0;
        ss >> k >> node;
        if (!ss || k < 1 || k > rec.T || node < 0 || node >= rec.n_nodes) {
            throw ParseError(path.string() + ": row out of range");
        }
        const std::size_t kk = static_cast<std::size_t>(k - 1);
        const std::size_t ii = static_cast<std::size_t>(node);
        StateVec x;
        StateVec t;
        for (int c = 0; c < kStateDim; ++c) ss >> x(c);
        for (int c = 0; c < kStateDim; ++c) ss >> t(c);
        long long cum_tx = 0;
        long long cum_vec = 0;
        long long cum_mat = 0;
        ss >> rec.gamma[kk][ii] >> rec.trace_P[kk][ii] >> rec.min_eig_P[kk][ii] >>
            rec.nees[kk][ii] >> cum_tx >> cum_vec >> cum_mat;
        if (!ss) {
            throw ParseError(path.string() + ": malformed row");
        }
        rec.xhat[kk][ii] = x;
        rec.truth[static_cast<std::size_t>(k)] = t;
        rec.min_cov_eig = std::min(rec.min_cov_eig, rec.min_eig_P[kk][ii]);
        if (k == rec.T) {
            rec.totals.sensor_tx[ii] = cum_tx;
            rec.totals.vec_scalars[ii] = cum_vec;
            rec.totals.mat_scalars[ii] = cum_mat;
        }
        ++rows;
    }
    if (rows != rec.T * rec.n_nodes) {
        throw ParseError(path.string() + ": expected " + std::to_string(rec.T * rec.n_nodes) +
                         " rows, found " + std::to_string(rows));
    }
    return rec;
}

json metrics_to_json(const RunMetrics& m, AlgoVariant variant, std::uint64_t seed,
                     const std::string& hash,
                     const std::vector<std::pair<int, std::string>>& failures) {
    static const char* kVarNames[kStateDim] = {"x", "y", "z", "vx", "vy", "vz", "omega"};
    json j;
    j["variant"] = variant_name(variant);
    j["runs"] = m.runs;
    j["seed"] = seed;
    if (!hash.empty()) {
        j["config_hash"] = hash;
    }
    j["horizon"] = m.T;
    j["nodes"] = m.n_nodes;
    for (int v = 0; v < kStateDim; ++v) {
        j["mean_rmse"][kVarNames[v]] = m.mean_rmse_per_var(v);
    }
    j["mean_rmse_pos"] = m.mean_rmse_pos;
    j["mean_rmse_vel"] = m.mean_rmse_vel;
    j["trigger_rate_pct"] = 100.0 * m.trigger_rate;
    j["trigger_rate_per_node_pct"] = json::array();
    for (double t : m.trigger_rate_per_node) {
        j["trigger_rate_per_node_pct"].push_back(100.0 * t);
    }
    j["messages"]["sensor_tx"] = m.sensor_tx_total;
    j["messages"]["vec_scalars"] = m.vec_scalars_total;
    j["messages"]["mat_scalars"] = m.mat_scalars_total;
    j["min_cov_eigenvalue"] = m.min_cov_eig;
    j["max_cov_asymmetry"] = m.max_cov_asym;
    j["failures"] = json::array();
    for (const auto& [idx, why] : failures) {
        j["failures"].push_back({{"run", idx}, {"reason", why}});
    }
    // Timing varies across reruns; everything above is seed-deterministic.
    j["timing"]["wall_seconds_total"] = m.wall_seconds_total;
    return j;
}

void write_metrics_csv(const fs::path& path, const RunMetrics& m) {
    std::ofstream out(path);
    out << "k,rmse_pos,rmse_vel,mean_nees\n";
    char buf[160];
    for (int k = 0; k < m.T; ++k) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", k + 1,
                      m.rmse_pos[static_cast<std::size_t>(k)],
                      m.rmse_vel[static_cast<std::size_t>(k)],
                      m.mean_nees[static_cast<std::size_t>(k)]);
        out << buf;
    }
}

void write_raster_csv(const fs::path& path, const RunRecord& rec) {
    std::ofstream out(path);
    out << "k,node,gamma\n";
    for (int k = 1; k <= rec.T; ++k) {
        for (int i = 0; i < rec.n_nodes; ++i) {
            out << k << ',' << i << ','
                << rec.gamma[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)] << "\n";
        }
    }
}

int cmd_simulate(const CommonOpts& opts, const std::string& algo, int runs,
                 const std::string& replay_dir) {
    ScenarioConfig cfg = load_config(opts);
    const AlgoVariant variant = parse_variant(algo);

    std::optional<ReplayData> replay;
    if (!replay_dir.empty()) {
        double rate = 0.0;
        replay = load_replay_bundle(replay_dir, &rate);
        cfg.dt = 1.0 / rate;
        cfg.horizon = static_cast<int>(replay->z.front().size());
        cfg.sensors.clear();
        for (const auto& poses : replay->poses) {
            cfg.sensors.push_back(poses.front());
        }
        const MeasMat r = cfg.noise.R.front();
        cfg.noise.R.assign(cfg.sensors.size(), r);
        // Start the estimators from the first recorded target state instead
        // of the synthetic scenario's.
        cfg.initial_state = replay->truth.front();
        cfg.sample_initial_state = false;
        const int n = static_cast<int>(cfg.sensors.size());
        bool edges_fit = !cfg.edges.empty();
        for (const auto& [a, b] : cfg.edges) {
            edges_fit = edges_fit && a < n && b < n;
        }
        if (!edges_fit) {
            cfg.edges.clear();
            for (int i = 0; i + 1 < n; ++i) {
                cfg.edges.emplace_back(i, i + 1);
            }
            if (n > 2) {
                cfg.edges.emplace_back(n - 1, 0);
            }
        }
        cfg.validate();
    }

    fs::create_directories(opts.out_dir);
    const std::string hash = hash_hex(config_hash(cfg));

    std::vector<RunRecord> records;
    if (replay) {
        records.push_back(run(cfg, variant, 0, &*replay));
    } else {
        records = run_ensemble(cfg, variant, runs);
    }

    for (const RunRecord& rec : records) {
        write_run_csv(fs::path(opts.out_dir) / ("run_" + std::to_string(rec.run_index) + ".csv"),
                      rec, hash);
    }
    const RunMetrics m = compute_metrics(records);
    write_metrics_csv(fs::path(opts.out_dir) / "metrics.csv", m);
    write_raster_csv(fs::path(opts.out_dir) / "raster.csv", records.front());
    save_scenario(cfg, (fs::path(opts.out_dir) / "config.json").string());
    {
        std::ofstream out(fs::path(opts.out_dir) / "summary.json");
        out << metrics_to_json(m, variant, cfg.seed, hash, {}).dump(2) << "\n";
    }
    std::printf("%s: %d run(s), TR %.2f%%, mean position RMSE %.4f m -> %s\n",
                variant_name(variant).c_str(), m.runs, 100.0 * m.trigger_rate, m.mean_rmse_pos,
                opts.out_dir.c_str());
    return kExitOk;
}

int cmd_compare(const CommonOpts& opts, const std::string& variants_arg, int runs,
                const std::string& sweep_delta, const std::string& sweep_sigma1,
                const std::string& sweep_sigma2) {
    const ScenarioConfig base = load_config(opts);

    std::vector<AlgoVariant> variants;
    {
        std::istringstream ss(variants_arg);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!name.empty()) {
                variants.push_back(parse_variant(name));
            }
        }
    }
    if (variants.empty() || runs < 1) {
        throw ConfigError("compare needs a nonempty variant list and --runs >= 1");
    }

    std::string sweep_name = "none";
    std::vector<double> sweep_values = {0.0};
    if (!sweep_delta.empty()) {
        sweep_name = "delta";
        sweep_values = parse_list(sweep_delta);
    } else if (!sweep_sigma1.empty()) {
        sweep_name = "sigma1";
        sweep_values = parse_list(sweep_sigma1);
    } else if (!sweep_sigma2.empty()) {
        sweep_name = "sigma2";
        sweep_values = parse_list(sweep_sigma2);
    }

    fs::create_directories(opts.out_dir);
    std::ofstream out(fs::path(opts.out_dir) / "compare.csv");
    out << "variant,sweep_param,sweep_value,runs_requested,runs_completed,"
           "rmse_x,rmse_y,rmse_z,rmse_vx,rmse_vy,rmse_vz,rmse_omega,"
           "rmse_pos,rmse_vel,trigger_rate_pct,sensor_tx,vec_scalars,mat_scalars,"
           "wall_seconds,error\n";

    char buf[1024];
    for (AlgoVariant v : variants) {
        for (double value : sweep_values) {
            ScenarioConfig cfg = base;
            if (sweep_name == "delta") {
                cfg.filter.delta = value;
            } else if (sweep_name == "sigma1") {
                cfg.filter.sigma1 = value;
            } else if (sweep_name == "sigma2") {
                cfg.filter.sigma2 = value;
            }
            std::string error;
            EnsembleResult res;
            try {
                res = run_ensemble_tolerant(cfg, v, runs);
            } catch (const std::exception& e) {
                error = e.what();
            }
            if (!res.failures.empty()) {
                error = std::to_string(res.failures.size()) +
                        " run(s) failed: " + res.failures.front().second;
            }
            if (res.runs.empty()) {
                out << variant_name(v) << ',' << sweep_name << ',' << value << ',' << runs
                    << ",0,,,,,,,,,,,,,,\"" << error << "\"\n";
                std::printf("%-8s %s=%g: all runs failed\n", variant_name(v).c_str(),
                            sweep_name.c_str(), value);
                continue;
            }
            const RunMetrics m = compute_metrics(res.runs);
            std::snprintf(buf, sizeof(buf),
                          "%s,%s,%.10g,%d,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.4f,"
                          "%lld,%lld,%lld,%.3f,\"%s\"\n",
                          variant_name(v).c_str(), sweep_name.c_str(), value, runs, m.runs,
                          m.mean_rmse_per_var(0), m.mean_rmse_per_var(1), m.mean_rmse_per_var(2),
                          m.mean_rmse_per_var(3), m.mean_rmse_per_var(4), m.mean_rmse_per_var(5),
                          m.mean_rmse_per_var(6), m.mean_rmse_pos, m.mean_rmse_vel,
                          100.0 * m.trigger_rate, m.sensor_tx_total, m.vec_scalars_total,
                          m.mat_scalars_total, m.wall_seconds_total, error.c_str());
            out << buf;

            if (sweep_name == "none") {
                write_metrics_csv(fs::path(opts.out_dir) / ("rmse_" + variant_name(v) + ".csv"),
                                  m);
            }
            std::printf("%-8s %s=%g: %d/%d runs, TR %.2f%%, pos RMSE %.4f\n",
                        variant_name(v).c_str(), sweep_name.c_str(), value, m.runs, runs,
                        100.0 * m.trigger_rate, m.mean_rmse_pos);
        }
    }
    std::printf("wrote %s\n", (fs::path(opts.out_dir) / "compare.csv").string().c_str());
    return kExitOk;
}

int cmd_ingest_tum(const std::string& target_path, const std::vector<std::string>& observer_paths,
                   double rate, double max_gap, double origin_radius, const std::string& out_dir) {
    if (observer_paths.empty()) {
        throw ConfigError("ingest-tum needs at least one --observer file");
    }
    std::vector<TumTrajectory> cleaned;
    cleaned.push_back(remove_outliers(parse_tum_file(target_path), max_gap, origin_radius));
    for (const std::string& p : observer_paths) {
        cleaned.push_back(remove_outliers(parse_tum_file(p), max_gap, origin_radius));
    }
    const auto aligned = align_and_resample(cleaned, rate);

    fs::create_directories(out_dir);
    write_tum_file(aligned[0], (fs::path(out_dir) / "aligned_target.tum").string());
    for (std::size_t i = 1; i < aligned.size(); ++i) {
        write_tum_file(
            aligned[i],
            (fs::path(out_dir) / ("aligned_sensor_" + std::to_string(i - 1) + ".tum")).string());
    }

    const ReplayMeasurements rm = to_measurements(aligned[0], {aligned.begin() + 1, aligned.end()});
    write_replay_bundle(rm, rate, out_dir);
    std::printf("ingested %zu observer log(s): %zu ticks, %d coincident sample(s) skipped -> %s\n",
                observer_paths.size(), rm.times.size(), rm.skipped, out_dir.c_str());
    return kExitOk;
}

int cmd_metrics(const std::string& in_dir, const std::string& out_file) {
    if (!fs::is_directory(in_dir)) {
        throw ConfigError("not a directory: " + in_dir);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw ConfigError("no run_*.csv files under " + in_dir);
    }
    std::vector<RunRecord> records;
    records.reserve(files.size());
    for (const auto& f : files) {
        records.push_back(read_run_csv(f));
    }
    const RunMetrics m = compute_metrics(records);

    const json j = metrics_to_json(m, records.front().variant, records.front().seed, "", {});
    if (out_file.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_file);
        out << j.dump(2) << "\n";
        std::printf("wrote %s (%d run(s))\n", out_file.c_str(), m.runs);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed event-triggered target-tracking simulator"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string algo = "EDC-CIF";
    int runs = 1;
    std::string replay_dir;

    CLI::App* sim = app.add_subcommand("simulate", "Run one variant and export records");
    sim->add_option("--config", common.config_path, "Scenario JSON (defaults to the built-in)");
    sim->add_option("--algo", algo, "Algorithm variant");
    sim->add_option("--runs", runs, "Monte-Carlo run count");
    sim->add_option("--seed", common.seed, "Override the config seed");
    sim->add_option("--out", common.out_dir, "Output directory");
    sim->add_option("--replay", replay_dir, "Replay bundle from ingest-tum");
    sim->add_option("--consensus-L", common.consensus_l, "Consensus iteration count");
    sim->add_option("--nodes", common.nodes, "Rebuild the network with this many sensors");

    std::string variants = "EC-EKF,EC-UKF,EC-CKF,ED-CIF,EDC-CIF";
    std::string sweep_delta;
    std::string sweep_sigma1;
    std::string sweep_sigma2;
    int compare_runs = 100;
    CLI::App* cmp = app.add_subcommand("compare", "Compare variants, optionally over a sweep");
    cmp->add_option("--config", common.config_path, "Scenario JSON");
    cmp->add_option("--variants", variants, "Comma-separated variant list");
    cmp->add_option("--runs", compare_runs, "Monte-Carlo runs per variant");
    cmp->add_option("--seed", common.seed, "Override the config seed");
    cmp->add_option("--out", common.out_dir, "Output directory");
    cmp->add_option("--sweep-delta", sweep_delta, "Comma-separated trigger thresholds");
    cmp->add_option("--sweep-sigma1", sweep_sigma1, "Comma-separated sigma1 values");
    cmp->add_option("--sweep-sigma2", sweep_sigma2, "Comma-separated sigma2 values");
    cmp->add_option("--consensus-L", common.consensus_l, "Consensus iteration count");
    cmp->add_option("--nodes", common.nodes, "Rebuild the network with this many sensors");

    std::string target_path;
    std::vector<std::string> observer_paths;
    double rate = 10.0;
    double max_gap = 0.5;
    double origin_radius = 1e-3;
    CLI::App* ing = app.add_subcommand("ingest-tum", "Build a replay bundle from TUM logs");
    ing->add_option("--target", target_path, "Target trajectory (TUM)")->required();
    ing->add_option("--observer", observer_paths, "Observer trajectory (TUM), repeatable")
        ->required();
    ing->add_option("--rate", rate, "Resampling rate (Hz)");
    ing->add_option("--max-gap", max_gap, "Largest tolerated sample gap (s)");
    ing->add_option("--origin-radius", origin_radius, "Origin-outlier radius (m)");
    ing->add_option("--out", common.out_dir, "Bundle output directory");

    std::string metrics_in;
    std::string metrics_out;
    CLI::App* met = app.add_subcommand("metrics", "Recompute metrics from stored run CSVs");
    met->add_option("--in", metrics_in, "Directory containing run_*.csv")->required();
    met->add_option("--out", metrics_out, "Summary JSON path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(common, algo, runs, replay_dir);
        }
        if (cmp->parsed()) {
            return cmd_compare(common, variants, compare_runs, sweep_delta, sweep_sigma1,
                               sweep_sigma2);
        }
        if (ing->parsed()) {
            return cmd_ingest_tum(target_path, observer_paths, rate, max_gap, origin_radius,
                                  common.out_dir);
        }
        if (met->parsed()) {
            return cmd_metrics(metrics_in, metrics_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
