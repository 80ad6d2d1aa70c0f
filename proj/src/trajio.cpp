#include "swarmtrack/trajio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace swarmtrack {

namespace fs = std::filesystem;

TumTrajectory parse_tum(std::istream& in) {
    TumTrajectory traj;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        // Tolerate comma-separated exports of the same 8 fields.
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<double> fields;
        double v = 0.0;
        while (ss >> v) {
            fields.push_back(v);
        }
        if (!ss.eof()) {
            throw ParseError("line " + std::to_string(line_no) + ": non-numeric field");
        }
        if (fields.empty()) {
            continue;  // blank or comment-only line
        }
        if (fields.size() != 8) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                             std::to_string(fields.size()));
        }
        TumRow row{fields[0], fields[1], fields[2], fields[3],
                   fields[4], fields[5], fields[6], fields[7]};
        const double qn = std::sqrt(row.qx * row.qx + row.qy * row.qy + row.qz * row.qz +
                                    row.qw * row.qw);
        if (std::abs(qn - 1.0) > 1e-3) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": quaternion norm deviates from 1 by more than 1e-3");
        }
        traj.rows.push_back(row);
    }
    return traj;
}

TumTrajectory parse_tum_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open trajectory file: " + path);
    }
    try {
        return parse_tum(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void serialize_tum(const TumTrajectory& traj, std::ostream& out) {
    char buf[256];
    for (const TumRow& r : traj.rows) {
        std::snprintf(buf, sizeof(buf), "%.9f %.12g %.12g %.12g %.12g %.12g %.12g %.12g\n", r.t,
                      r.tx, r.ty, r.tz, r.qx, r.qy, r.qz, r.qw);
        out << buf;
    }
}

void write_tum_file(const TumTrajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write trajectory file: " + path);
    }
    serialize_tum(traj, out);
}

TumTrajectory remove_outliers(const TumTrajectory& traj, double max_gap_s, double origin_radius_m) {
    if (traj.empty()) {
        throw ParseError("remove_outliers: empty trajectory");
    }

    // Pass 1: spurious zero fixes near the origin, then nonpositive time
    // increments.
    std::vector<TumRow> kept;
    kept.reserve(traj.rows.size());
    for (const TumRow& r : traj.rows) {
        const double d = std::sqrt(r.tx * r.tx + r.ty * r.ty + r.tz * r.tz);
        if (d < origin_radius_m) {
            continue;
        }
        if (!kept.empty() && r.t <= kept.back().t) {
            continue;
        }
        kept.push_back(r);
    }
    if (kept.empty()) {
        throw ParseError("remove_outliers: all rows dropped");
    }

    // Pass 2: split at abnormal gaps, keep the longest contiguous segment
    // (the later one on ties).
    std::size_t best_begin = 0;
    std::size_t best_len = 0;
    std::size_t seg_begin = 0;
    for (std::size_t i = 1; i <= kept.size(); ++i) {
        const bool split = (i == kept.size()) || (kept[i].t - kept[i - 1].t > max_gap_s);
        if (split) {
            const std::size_t len = i - seg_begin;
            if (len >= best_len) {
                best_len = len;
                best_begin = seg_begin;
            }
            seg_begin = i;
        }
    }

    TumTrajectory out;
    out.rows.assign(kept.begin() + static_cast<std::ptrdiff_t>(best_begin),
                    kept.begin() + static_cast<std::ptrdiff_t>(best_begin + best_len));
    return out;
}

namespace {

TumRow interpolate(const TumTrajectory& traj, double t) {
    const auto& rows = traj.rows;
    auto it = std::lower_bound(rows.begin(), rows.end(), t,
                               [](const TumRow& r, double v) { return r.t < v; });
    if (it == rows.begin()) {
        return rows.front();
    }
    if (it == rows.end()) {
        return rows.back();
    }
    const TumRow& b = *it;
    const TumRow& a = *(it - 1);
    const double span = b.t - a.t;
    const double u = span > 0.0 ? (t - a.t) / span : 0.0;

    TumRow r;
    r.t = t;
    r.tx = a.tx + u * (b.tx - a.tx);
    r.ty = a.ty + u * (b.ty - a.ty);
    r.tz = a.tz + u * (b.tz - a.tz);
    r.qx = a.qx + u * (b.qx - a.qx);
    r.qy = a.qy + u * (b.qy - a.qy);
    r.qz = a.qz + u * (b.qz - a.qz);
    r.qw = a.qw + u * (b.qw - a.qw);
    double qn = std::sqrt(r.qx * r.qx + r.qy * r.qy + r.qz * r.qz + r.qw * r.qw);
    if (qn < 1e-6) {
        // Antipodal pair; fall back to the earlier sample's orientation.
        r.qx = a.qx;
        r.qy = a.qy;
        r.qz = a.qz;
        r.qw = a.qw;
        qn = 1.0;
    }
    r.qx /= qn;
    r.qy /= qn;
    r.qz /= qn;
    r.qw /= qn;
    return r;
}

}  // namespace

std::vector<TumTrajectory> align_and_resample(const std::vector<TumTrajectory>& trajs,
                                              double rate_hz) {
    if (trajs.empty()) {
        throw ParseError("align_and_resample: no trajectories");
    }
    if (rate_hz <= 0.0) {
        throw ParseError("align_and_resample: rate must be positive");
    }
    double start = -std::numeric_limits<double>::infinity();
    double end = std::numeric_limits<double>::infinity();
    for (const TumTrajectory& t : trajs) {
        if (t.empty()) {
            throw ParseError("align_and_resample: empty trajectory");
        }
        start = std::max(start, t.start());
        end = std::min(end, t.end());
    }
    if (start > end) {
        throw ParseError("align_and_resample: trajectories have no common time window");
    }

    const double dt = 1.0 / rate_hz;
    const int samples = static_cast<int>(std::floor((end - start) / dt + 1e-9)) + 1;
    std::vector<TumTrajectory> out(trajs.size());
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        out[i].rows.reserve(static_cast<std::size_t>(samples));
        for (int j = 0; j < samples; ++j) {
            out[i].rows.push_back(interpolate(trajs[i], start + j * dt));
        }
    }
    return out;
}

ReplayMeasurements to_measurements(const TumTrajectory& target,
                                   const std::vector<TumTrajectory>& observers) {
    if (observers.empty()) {
        throw ParseError("to_measurements: no observers");
    }
    for (const TumTrajectory& o : observers) {
        if (o.rows.size() != target.rows.size()) {
            throw ParseError("to_measurements: trajectories are not on a shared clock");
        }
    }

    ReplayMeasurements out;
    out.measurements.resize(observers.size());
    out.poses.resize(observers.size());

    for (std::size_t k = 0; k < target.rows.size(); ++k) {
        const TumRow& tk = target.rows[k];
        StateVec x = StateVec::Zero();
        x(0) = tk.tx;
        x(1) = tk.ty;
        x(2) = tk.tz;

        bool coincident = false;
        std::vector<Measurement> zs(observers.size());
        std::vector<SensorPose> ps(observers.size());
        for (std::size_t i = 0; i < observers.size(); ++i) {
            const TumRow& ok = observers[i].rows[k];
            ps[i] = SensorPose{ok.tx, ok.ty, ok.tz};
            try {
                zs[i] = observe_exact(x, ps[i]);
            } catch (const FilterError&) {
                coincident = true;
                break;
            }
        }
        if (coincident) {
            ++out.skipped;
            continue;
        }
        out.times.push_back(tk.t);
        out.target_positions.emplace_back(tk.tx, tk.ty, tk.tz);
        for (std::size_t i = 0; i < observers.size(); ++i) {
            out.measurements[i].push_back(zs[i]);
            out.poses[i].push_back(ps[i]);
        }
    }
    if (out.times.empty()) {
        throw ParseError("to_measurements: every sample was coincident");
    }
    return out;
}

void write_replay_bundle(const ReplayMeasurements& replay, double rate_hz,
                         const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::size_t n_obs = replay.measurements.size();
    const std::size_t n_ticks = replay.times.size();

    nlohmann::json index;
    index["rate_hz"] = rate_hz;
    index["n_ticks"] = n_ticks;
    index["n_sensors"] = n_obs;
    index["skipped_samples"] = replay.skipped;
    index["target_file"] = "target.csv";
    index["measurement_files"] = nlohmann::json::array();

    char buf[512];
    {
        std::ofstream out(fs::path(out_dir) / "target.csv");
        out << "k,t,x,y,z\n";
        for (std::size_t k = 0; k < n_ticks; ++k) {
            std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.12g,%.12g,%.12g\n", k, replay.times[k],
                          replay.target_positions[k](0), replay.target_positions[k](1),
                          replay.target_positions[k](2));
            out << buf;
        }
    }
    for (std::size_t i = 0; i < n_obs; ++i) {
        const std::string name = "sensor_" + std::to_string(i) + ".csv";
        index["measurement_files"].push_back(name);
        std::ofstream out(fs::path(out_dir) / name);
        out << "k,t,r,phi,rho,xs,ys,zs\n";
        for (std::size_t k = 0; k < n_ticks; ++k) {
            const Measurement& z = replay.measurements[i][k];
            const SensorPose& p = replay.poses[i][k];
            std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", k,
                          replay.times[k], z.r, z.phi, z.rho, p.xs, p.ys, p.zs);
            out << buf;
        }
    }
    std::ofstream out(fs::path(out_dir) / "replay.json");
    out << index.dump(2) << "\n";
}

namespace {

std::vector<std::vector<double>> read_csv(const fs::path& path, std::size_t n_cols) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open replay file: " + path.string());
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header = true;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<double> fields;
        double v = 0.0;
        while (ss >> v) {
            fields.push_back(v);
        }
        if (fields.size() != n_cols) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                             ": expected " + std::to_string(n_cols) + " columns");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

ReplayData load_replay_bundle(const std::string& dir, double* rate_hz) {
    const fs::path root(dir);
    std::ifstream in(root / "replay.json");
    if (!in) {
        throw ParseError("cannot open replay bundle index: " + (root / "replay.json").string());
    }
    nlohmann::json index;
    try {
        in >> index;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("replay.json: ") + e.what());
    }
    const double rate = index.at("rate_hz").get<double>();
    if (rate_hz != nullptr) {
        *rate_hz = rate;
    }
    const double dt = 1.0 / rate;

    const auto target_rows = read_csv(root / index.at("target_file").get<std::string>(), 5);
    const std::size_t T = target_rows.size();
    if (T < 2) {
        throw ParseError("replay bundle: need at least two target samples");
    }

    ReplayData replay;
    // Truth states: positions from the log, velocities by differencing, zero
    // turn rate. Entry 0 mirrors the first sample so truth has T+1 entries.
    replay.truth.resize(T + 1, StateVec::Zero());
    for (std::size_t k = 0; k < T; ++k) {
        StateVec& x = replay.truth[k + 1];
        x(0) = target_rows[k][2];
        x(1) = target_rows[k][3];
        x(2) = target_rows[k][4];
        const std::size_t prev = k > 0 ? k - 1 : 0;
        const std::size_t next = k + 1 < T ? k + 1 : k;
        const double span = static_cast<double>(next - prev) * dt;
        if (span > 0.0) {
            x(3) = (target_rows[next][2] - target_rows[prev][2]) / span;
            x(4) = (target_rows[next][3] - target_rows[prev][3]) / span;
            x(5) = (target_rows[next][4] - target_rows[prev][4]) / span;
        }
    }
    replay.truth[0] = replay.truth[1];

    for (const auto& fname : index.at("measurement_files")) {
        const auto rows = read_csv(root / fname.get<std::string>(), 8);
        if (rows.size() != T) {
            throw ParseError("replay bundle: sensor file length mismatch");
        }
        std::vector<MeasVec> z;
        std::vector<SensorPose> poses;
        z.reserve(T);
        poses.reserve(T);
        for (const auto& r : rows) {
            z.push_back(MeasVec(r[2], r[3], r[4]));
            poses.push_back(SensorPose{r[5], r[6], r[7]});
        }
        replay.z.push_back(std::move(z));
        replay.poses.push_back(std::move(poses));
    }
    if (replay.z.empty()) {
        throw ParseError("replay bundle: no sensor files listed");
    }
    return replay;
}

}  // namespace swarmtrack
