#include "swarmtrack/motion.hpp"

#include <cmath>

namespace swarmtrack {

namespace {

// Below this |omega*dt| the closed-form turn entries lose precision to
// cancellation, so fourth-order series are used instead.
constexpr double kTurnSeriesCutoff = 1e-4;

struct TurnCoeffs {
    double sin_t = 0.0;       // sin(theta)
    double cos_t = 1.0;       // cos(theta)
    double sin_over_w = 0.0;  // sin(theta)/omega
    double vers_over_w = 0.0; // (1 - cos(theta))/omega
};

TurnCoeffs turn_coeffs(double omega, double dt) {
    const double theta = omega * dt;
    TurnCoeffs c;
    c.sin_t = std::sin(theta);
    c.cos_t = std::cos(theta);
    if (std::abs(theta) < kTurnSeriesCutoff) {
        const double t2 = theta * theta;
        c.sin_over_w = dt * (1.0 - t2 / 6.0 + t2 * t2 / 120.0);
        c.vers_over_w = dt * (theta / 2.0 - theta * t2 / 24.0);
    } else {
        c.sin_over_w = c.sin_t / omega;
        c.vers_over_w = (1.0 - c.cos_t) / omega;
    }
    return c;
}

}  // namespace

StateVec coordinated_turn_step(const StateVec& x, double dt) {
    const double vx = x(3);
    const double vy = x(4);
    const double omega = x(6);
    const TurnCoeffs c = turn_coeffs(omega, dt);

    StateVec out;
    out(0) = x(0) + c.sin_over_w * vx - c.vers_over_w * vy;
    out(1) = x(1) + c.vers_over_w * vx + c.sin_over_w * vy;
    out(2) = x(2) + dt * x(5);
    out(3) = c.cos_t * vx - c.sin_t * vy;
    out(4) = c.sin_t * vx + c.cos_t * vy;
    out(5) = x(5);
    out(6) = omega;
    return out;
}

StateMat coordinated_turn_jacobian(const StateVec& x, double dt) {
    const double vx = x(3);
    const double vy = x(4);
    const double omega = x(6);
    const double theta = omega * dt;
    const TurnCoeffs c = turn_coeffs(omega, dt);

    // d(sin(theta)/omega)/domega and d((1-cos(theta))/omega)/domega; both
    // cancel catastrophically near theta = 0, handled by series.
    double d_sin_over_w = 0.0;
    double d_vers_over_w = 0.0;
    if (std::abs(theta) < kTurnSeriesCutoff) {
        const double t2 = theta * theta;
        d_sin_over_w = dt * dt * (-theta / 3.0 + theta * t2 / 30.0);
        d_vers_over_w = dt * dt * (0.5 - t2 / 8.0);
    } else {
        d_sin_over_w = (theta * c.cos_t - c.sin_t) / (omega * omega);
        d_vers_over_w = (theta * c.sin_t - (1.0 - c.cos_t)) / (omega * omega);
    }

    StateMat F = StateMat::Identity();
    F(0, 3) = c.sin_over_w;
    F(0, 4) = -c.vers_over_w;
    F(0, 6) = d_sin_over_w * vx - d_vers_over_w * vy;
    F(1, 3) = c.vers_over_w;
    F(1, 4) = c.sin_over_w;
    F(1, 6) = d_vers_over_w * vx + d_sin_over_w * vy;
    F(2, 5) = dt;
    F(3, 3) = c.cos_t;
    F(3, 4) = -c.sin_t;
    F(3, 6) = dt * (-c.sin_t * vx - c.cos_t * vy);
    F(4, 3) = c.sin_t;
    F(4, 4) = c.cos_t;
    F(4, 6) = dt * (c.cos_t * vx - c.sin_t * vy);
    return F;
}

Measurement observe_exact(const StateVec& x, const SensorPose& pose) {
    const double dx = x(0) - pose.xs;
    const double dy = x(1) - pose.ys;
    const double dz = x(2) - pose.zs;
    const double rh2 = dx * dx + dy * dy;
    const double r = std::sqrt(rh2 + dz * dz);
    if (r == 0.0) {
        throw FilterError("observe: target coincides with sensor position");
    }
    Measurement z;
    z.r = r;
    const double rh = std::sqrt(rh2);
    if (rh == 0.0) {
        // Vertical degeneracy convention.
        z.phi = dz > 0.0 ? M_PI / 2.0 : -M_PI / 2.0;
        z.rho = 0.0;
    } else {
        z.phi = std::atan(dz / rh);
        z.rho = std::atan2(dy, dx);
    }
    return z;
}

JacobianMat range_pitch_azimuth_jacobian(const StateVec& x, const SensorPose& pose) {
    const double dx = x(0) - pose.xs;
    const double dy = x(1) - pose.ys;
    const double dz = x(2) - pose.zs;
    const double rh2 = dx * dx + dy * dy;
    const double r2 = rh2 + dz * dz;
    const double r = std::sqrt(r2);
    const double rh = std::sqrt(rh2);
    if (r == 0.0) {
        throw FilterError("measurement_jacobian: target coincides with sensor position");
    }
    if (rh == 0.0) {
        throw FilterError("measurement_jacobian: vertical-degeneracy configuration");
    }

    JacobianMat G = JacobianMat::Zero();
    G(0, 0) = dx / r;
    G(0, 1) = dy / r;
    G(0, 2) = dz / r;
    G(1, 0) = -dx * dz / (rh * r2);
    G(1, 1) = -dy * dz / (rh * r2);
    G(1, 2) = rh / r2;
    G(2, 0) = -dy / rh2;
    G(2, 1) = dx / rh2;
    return G;
}

Eigen::Vector3d invert_observation(const Measurement& z, const SensorPose& pose) {
    const double rh = z.r * std::cos(z.phi);
    return Eigen::Vector3d(pose.xs + rh * std::cos(z.rho),
                           pose.ys + rh * std::sin(z.rho),
                           pose.zs + z.r * std::sin(z.phi));
}

}  // namespace swarmtrack
