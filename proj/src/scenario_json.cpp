#include "swarmtrack/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace swarmtrack {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

// Accepts either nested rows or a flat row-major array.
Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& key) {
    Eigen::MatrixXd m(rows, cols);
    if (!j.is_array()) {
        throw ConfigError(key + ": expected an array");
    }
    if (!j.empty() && j.front().is_array()) {
        if (static_cast<Eigen::Index>(j.size()) != rows) {
            throw ConfigError(key + ": expected " + std::to_string(rows) + " rows");
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            const json& row = j[static_cast<std::size_t>(i)];
            if (static_cast<Eigen::Index>(row.size()) != cols) {
                throw ConfigError(key + ": expected " + std::to_string(cols) + " columns");
            }
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
            }
        }
    } else {
        if (static_cast<Eigen::Index>(j.size()) != rows * cols) {
            throw ConfigError(key + ": expected " + std::to_string(rows * cols) + " values");
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(i, c) = j[static_cast<std::size_t>(i * cols + c)].get<double>();
            }
        }
    }
    return m;
}

std::vector<std::pair<int, int>> preset_edges(const std::string& name, int n) {
    std::vector<std::pair<int, int>> edges;
    if (name == "ring" || name == "ring4") {
        if (name == "ring4" && n != 4) {
            throw ConfigError("topology preset ring4 requires exactly 4 sensors");
        }
        for (int i = 0; i + 1 < n; ++i) {
            edges.emplace_back(i, i + 1);
        }
        if (n > 2) {
            edges.emplace_back(n - 1, 0);
        }
    } else if (name == "star") {
        for (int i = 1; i < n; ++i) {
            edges.emplace_back(0, i);
        }
    } else if (name == "full") {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                edges.emplace_back(i, j);
            }
        }
    } else {
        throw ConfigError("unknown topology preset: " + name);
    }
    return edges;
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario config: ") + e.what());
    }

    ScenarioConfig cfg = default_scenario();
    try {
        if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
        if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("sample_initial_state")) {
            cfg.sample_initial_state = j["sample_initial_state"].get<bool>();
        }
        if (j.contains("initial_state")) {
            cfg.initial_state = matrix_from_json(j["initial_state"], kStateDim, 1, "initial_state");
        }
        if (j.contains("initial_cov")) {
            cfg.initial_cov = matrix_from_json(j["initial_cov"], kStateDim, kStateDim, "initial_cov");
        }
        if (j.contains("sensors")) {
            cfg.sensors.clear();
            for (const auto& s : j["sensors"]) {
                if (s.size() != 3) {
                    throw ConfigError("sensors: each entry must be [x, y, z]");
                }
                cfg.sensors.push_back(SensorPose{s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
            }
        }
        const int n = static_cast<int>(cfg.sensors.size());
        if (j.contains("q")) {
            cfg.noise.Q = matrix_from_json(j["q"], kStateDim, kStateDim, "q");
        }
        if (j.contains("r")) {
            cfg.noise.R.clear();
            const json& r = j["r"];
            if (!r.is_array()) {
                throw ConfigError("r: expected an array of per-sensor 3x3 covariances");
            }
            // A single matrix is broadcast to all sensors.
            const bool single = !r.empty() && r.front().is_array() && !r.front().empty() &&
                                r.front().front().is_number();
            if (single && r.size() == kMeasDim) {
                const MeasMat m = matrix_from_json(r, kMeasDim, kMeasDim, "r");
                cfg.noise.R.assign(static_cast<std::size_t>(n), m);
            } else {
                for (std::size_t i = 0; i < r.size(); ++i) {
                    cfg.noise.R.push_back(
                        matrix_from_json(r[i], kMeasDim, kMeasDim, "r[" + std::to_string(i) + "]"));
                }
            }
        } else if (static_cast<int>(cfg.noise.R.size()) != n && !cfg.noise.R.empty()) {
            cfg.noise.R.assign(static_cast<std::size_t>(n), cfg.noise.R.front());
        }
        if (j.contains("topology")) {
            const json& t = j["topology"];
            if (t.is_string()) {
                cfg.edges = preset_edges(t.get<std::string>(), n);
            } else {
                cfg.edges.clear();
                for (const auto& e : t) {
                    if (e.size() != 2) {
                        throw ConfigError("topology: edges must be [i, j] pairs");
                    }
                    cfg.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
                }
            }
        } else if (static_cast<int>(cfg.sensors.size()) != 4 || cfg.edges.empty()) {
            cfg.edges = preset_edges("ring", n);
        }
        if (j.contains("filter")) {
            const json& f = j["filter"];
            if (f.contains("delta")) cfg.filter.delta = f["delta"].get<double>();
            if (f.contains("sigma1")) cfg.filter.sigma1 = f["sigma1"].get<double>();
            if (f.contains("sigma2")) cfg.filter.sigma2 = f["sigma2"].get<double>();
            if (f.contains("compensation")) cfg.filter.compensation = f["compensation"].get<bool>();
            if (f.contains("compensation_sigma")) {
                cfg.filter.compensation_sigma =
                    MeasMat(matrix_from_json(f["compensation_sigma"], kMeasDim, kMeasDim,
                                             "filter.compensation_sigma"));
            }
            if (f.contains("trigger_weights")) {
                cfg.filter.trigger_weights =
                    matrix_from_json(f["trigger_weights"], kMeasDim, 1, "filter.trigger_weights");
            }
            if (f.contains("ukf")) {
                const json& u = f["ukf"];
                if (u.contains("alpha")) cfg.filter.ukf_alpha = u["alpha"].get<double>();
                if (u.contains("beta")) cfg.filter.ukf_beta = u["beta"].get<double>();
                if (u.contains("kappa")) cfg.filter.ukf_kappa = u["kappa"].get<double>();
            }
        }
        if (j.contains("fusion")) {
            const json& f = j["fusion"];
            if (f.contains("consensus_L")) cfg.fusion.consensus_L = f["consensus_L"].get<int>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario config: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
    json j;
    j["dt"] = cfg.dt;
    j["horizon"] = cfg.horizon;
    j["seed"] = cfg.seed;
    j["sample_initial_state"] = cfg.sample_initial_state;
    j["initial_state"] = json::array();
    for (int i = 0; i < kStateDim; ++i) {
        j["initial_state"].push_back(cfg.initial_state(i));
    }
    j["initial_cov"] = matrix_to_json(cfg.initial_cov);
    j["sensors"] = json::array();
    for (const auto& s : cfg.sensors) {
        j["sensors"].push_back({s.xs, s.ys, s.zs});
    }
    j["q"] = matrix_to_json(cfg.noise.Q);
    j["r"] = json::array();
    for (const auto& r : cfg.noise.R) {
        j["r"].push_back(matrix_to_json(r));
    }
    j["topology"] = json::array();
    for (const auto& [a, b] : cfg.edges) {
        j["topology"].push_back({a, b});
    }
    j["filter"]["delta"] = cfg.filter.delta;
    j["filter"]["sigma1"] = cfg.filter.sigma1;
    j["filter"]["sigma2"] = cfg.filter.sigma2;
    j["filter"]["compensation"] = cfg.filter.compensation;
    if (cfg.filter.compensation_sigma) {
        j["filter"]["compensation_sigma"] = matrix_to_json(*cfg.filter.compensation_sigma);
    }
    j["filter"]["trigger_weights"] = {cfg.filter.trigger_weights(0), cfg.filter.trigger_weights(1),
                                      cfg.filter.trigger_weights(2)};
    j["filter"]["ukf"] = {{"alpha", cfg.filter.ukf_alpha},
                          {"beta", cfg.filter.ukf_beta},
                          {"kappa", cfg.filter.ukf_kappa}};
    j["fusion"]["consensus_L"] = cfg.fusion.consensus_L;
    return j.dump(2);
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario config: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write scenario config: " + path);
    }
    out << scenario_to_json_text(cfg) << "\n";
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
    const std::string text = scenario_to_json_text(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace swarmtrack
