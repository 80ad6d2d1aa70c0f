#pragma once

#include "swarmtrack/types.hpp"

namespace swarmtrack {

/// Sensor location in the world frame (meters).
struct SensorPose {
    double xs = 0.0;
    double ys = 0.0;
    double zs = 0.0;
};

/// Range / pitch / azimuth measurement of the target from one sensor.
struct Measurement {
    double r = 0.0;    // range (m), > 0
    double phi = 0.0;  // pitch (rad), (-pi/2, pi/2]
    double rho = 0.0;  // azimuth (rad), (-pi, pi]

    MeasVec vec() const { return MeasVec(r, phi, rho); }
    static Measurement from_vec(const MeasVec& z) { return Measurement{z(0), z(1), z(2)}; }
};

// Deterministic coordinated-turn step: the horizontal position/velocity block
// rotates at rate omega over dt, the vertical channel is constant velocity and
// omega itself is constant. Small |omega*dt| switches to series forms so the
// map stays smooth through omega = 0.
StateVec coordinated_turn_step(const StateVec& x, double dt);

/// d f / d x of the coordinated-turn step, for EKF prediction.
StateMat coordinated_turn_jacobian(const StateVec& x, double dt);

/// Noiseless observation of the target from a sensor. Throws FilterError when
/// target and sensor coincide; zero horizontal distance yields phi = +-pi/2,
/// rho = 0.
Measurement observe_exact(const StateVec& x, const SensorPose& pose);

/// Analytic d h / d x (3x7). Velocity and turn-rate columns are zero. Throws
/// FilterError at coincident or zero-horizontal-distance configurations.
JacobianMat range_pitch_azimuth_jacobian(const StateVec& x, const SensorPose& pose);

/// Reconstruct the target position from a measurement and the observing pose.
Eigen::Vector3d invert_observation(const Measurement& z, const SensorPose& pose);

}  // namespace swarmtrack
