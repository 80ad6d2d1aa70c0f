#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace swarmtrack {

inline constexpr int kStateDim = 7;  // [x y z vx vy vz omega]
inline constexpr int kMeasDim = 3;   // [range pitch azimuth]

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVec = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMat = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using CrossMat = Eigen::Matrix<double, kStateDim, kMeasDim>;     // P_xz, gains
using JacobianMat = Eigen::Matrix<double, kMeasDim, kStateDim>;  // dh/dx

/// Configuration / input-file problems. CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures inside a local filter (square roots, singular matrices).
class FilterError : public std::runtime_error {
public:
    explicit FilterError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fusion produced a non-PD information matrix or invalid weights.
class FusionError : public std::runtime_error {
public:
    explicit FusionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed text input (trajectory logs, replay bundles).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * M_PI);
    if (w <= -M_PI) {
        w += 2.0 * M_PI;
    }
    return w;
}

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
    return (0.5 * (m + m.transpose())).eval();
}

inline double max_asymmetry(const StateMat& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const StateMat& m) {
    Eigen::SelfAdjointEigenSolver<StateMat> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// State estimate in moment form.
struct EstimatePair {
    StateVec xhat = StateVec::Zero();
    StateMat P = StateMat::Identity();
};

/// State estimate in information form: Y = P^-1, yhat = P^-1 * xhat.
struct InfoPair {
    StateVec yhat = StateVec::Zero();
    StateMat Y = StateMat::Identity();
};

/// Additive measurement terms exchanged in the diffusion adaptation stage.
struct InfoContribution {
    StateVec i_vec = StateVec::Zero();
    StateMat I_mat = StateMat::Zero();
};

namespace detail {

template <int N>
Eigen::Matrix<double, N, N> invert_pd(const Eigen::Matrix<double, N, N>& m, const char* what) {
    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(symmetrized(m));
    if (llt.info() != Eigen::Success) {
        throw FilterError(std::string(what) + ": matrix is not positive definite");
    }
    return llt.solve(Eigen::Matrix<double, N, N>::Identity());
}

template <int N>
Eigen::Matrix<double, N, N> psd_matrix_sqrt(const Eigen::Matrix<double, N, N>& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(symmetrized(m));
    if (es.info() != Eigen::Success) {
        throw FilterError(std::string(what) + ": eigendecomposition failed");
    }
    Eigen::Matrix<double, N, 1> d = es.eigenvalues();
    const double floor = -1e-10 * std::max(1.0, d.cwiseAbs().maxCoeff());
    for (int i = 0; i < N; ++i) {
        if (d(i) < floor) {
            throw FilterError(std::string(what) + ": matrix is not positive semidefinite");
        }
        d(i) = std::sqrt(std::max(d(i), 0.0));
    }
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

inline InfoPair to_info(const EstimatePair& p) {
    const StateMat Y = detail::invert_pd<kStateDim>(p.P, "to_info");
    return InfoPair{Y * p.xhat, symmetrized(Y)};
}

inline EstimatePair from_info(const InfoPair& q) {
    const StateMat P = detail::invert_pd<kStateDim>(q.Y, "from_info");
    return EstimatePair{P * q.yhat, symmetrized(P)};
}

}  // namespace swarmtrack
