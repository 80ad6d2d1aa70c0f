#pragma once

#include "swarmtrack/motion.hpp"
#include "swarmtrack/types.hpp"

namespace swarmtrack {

/// Target dynamics seen by the filters: deterministic transition plus its
/// Jacobian (the Jacobian is only consulted by the EKF path).
class DynamicsModel {
public:
    virtual ~DynamicsModel() = default;
    virtual StateVec step(const StateVec& x, double dt) const = 0;
    virtual StateMat jacobian(const StateVec& x, double dt) const = 0;
};

/// Observation model seen by the filters. wrap_residual maps a raw
/// measurement difference onto the correct branch (angle wrap-around);
/// models without angular channels leave it as the identity.
class MeasurementModel {
public:
    virtual ~MeasurementModel() = default;
    virtual MeasVec observe(const StateVec& x) const = 0;
    virtual JacobianMat jacobian(const StateVec& x) const = 0;
    virtual MeasVec wrap_residual(const MeasVec& d) const { return d; }
};

class CoordinatedTurnModel final : public DynamicsModel {
public:
    StateVec step(const StateVec& x, double dt) const override {
        return coordinated_turn_step(x, dt);
    }
    StateMat jacobian(const StateVec& x, double dt) const override {
        return coordinated_turn_jacobian(x, dt);
    }
};

class RangePitchAzimuthModel final : public MeasurementModel {
public:
    RangePitchAzimuthModel() = default;
    explicit RangePitchAzimuthModel(const SensorPose& pose) : pose_(pose) {}

    MeasVec observe(const StateVec& x) const override {
        return observe_exact(x, pose_).vec();
    }
    JacobianMat jacobian(const StateVec& x) const override {
        return range_pitch_azimuth_jacobian(x, pose_);
    }
    MeasVec wrap_residual(const MeasVec& d) const override {
        return MeasVec(d(0), wrap_angle(d(1)), wrap_angle(d(2)));
    }

    const SensorPose& pose() const { return pose_; }
    // Replay logs come from moving observers; the pipeline refreshes the pose
    // each tick in that case.
    void set_pose(const SensorPose& pose) { pose_ = pose; }

private:
    SensorPose pose_;
};

}  // namespace swarmtrack
