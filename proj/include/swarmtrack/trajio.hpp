#pragma once

#include "swarmtrack/motion.hpp"
#include "swarmtrack/pipeline.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace swarmtrack {

/// One TUM-format row: timestamp, position, unit quaternion.
struct TumRow {
    double t = 0.0;
    double tx = 0.0, ty = 0.0, tz = 0.0;
    double qx = 0.0, qy = 0.0, qz = 0.0, qw = 1.0;
};

struct TumTrajectory {
    std::vector<TumRow> rows;

    bool empty() const { return rows.empty(); }
    double start() const { return rows.front().t; }
    double end() const { return rows.back().t; }
};

/// Parse "t tx ty tz qx qy qz qw" lines; '#' starts a comment. Malformed
/// lines (wrong field count, non-numeric fields, far-from-unit quaternion)
/// raise ParseError with the line number.
TumTrajectory parse_tum(std::istream& in);
TumTrajectory parse_tum_file(const std::string& path);
void serialize_tum(const TumTrajectory& traj, std::ostream& out);
void write_tum_file(const TumTrajectory& traj, const std::string& path);

/// Drop origin outliers and rows with nonpositive time increments, then keep
/// the longest contiguous segment after splitting at gaps above max_gap
/// (later segment wins ties). Throws ParseError when nothing survives.
TumTrajectory remove_outliers(const TumTrajectory& traj, double max_gap_s, double origin_radius_m);

/// Resample all trajectories onto the shared clock [max of starts, min of
/// ends] at the given rate. Positions interpolate linearly; quaternions
/// interpolate componentwise and are renormalized.
std::vector<TumTrajectory> align_and_resample(const std::vector<TumTrajectory>& trajs,
                                              double rate_hz);

struct ReplayMeasurements {
    // [observer][tick]; ticks where any observer coincides with the target
    // are skipped for all observers to keep the sequences aligned.
    std::vector<std::vector<Measurement>> measurements;
    std::vector<std::vector<SensorPose>> poses;
    std::vector<double> times;
    std::vector<Eigen::Vector3d> target_positions;
    int skipped = 0;
};

/// Observe the target trajectory from each observer trajectory; all inputs
/// must already share a clock (same length and stamps).
ReplayMeasurements to_measurements(const TumTrajectory& target,
                                   const std::vector<TumTrajectory>& observers);

/// Replay bundle: a JSON index plus per-sensor measurement CSVs, consumable
/// by `simulate --replay`.
void write_replay_bundle(const ReplayMeasurements& replay, double rate_hz,
                         const std::string& out_dir);
ReplayData load_replay_bundle(const std::string& dir, double* rate_hz = nullptr);

}  // namespace swarmtrack
