#include "swarmtrack/estimator.hpp"

#include <cmath>
#include <string>

namespace swarmtrack {

namespace {

constexpr int kN = kStateDim;

MeasMat solve_pd(const MeasMat& m, const char* what, Eigen::LLT<MeasMat>* out = nullptr) {
    Eigen::LLT<MeasMat> llt(symmetrized(m));
    if (llt.info() != Eigen::Success) {
        throw FilterError(std::string(what) + ": matrix is not positive definite");
    }
    if (out != nullptr) {
        *out = llt;
    }
    return llt.solve(MeasMat::Identity());
}

}  // namespace

StateMat cholesky_with_repair(const StateMat& P, const char* what) {
    Eigen::LLT<StateMat> llt(symmetrized(P));
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    const double jitter = 1e-9 * P.trace() / kN;
    StateMat repaired = symmetrized(P);
    repaired.diagonal().array() += jitter;
    llt.compute(repaired);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    throw FilterError(std::string(what) + ": covariance square root failed after jitter repair");
}

CubatureSet cubature_points(const EstimatePair& p) {
    const StateMat L = cholesky_with_repair(p.P, "cubature_points");
    const double scale = std::sqrt(static_cast<double>(kN));
    CubatureSet cs;
    for (int r = 0; r < kN; ++r) {
        const StateVec dir = scale * L.col(r);
        cs.points[static_cast<std::size_t>(r)] = p.xhat + dir;
        cs.points[static_cast<std::size_t>(r + kN)] = p.xhat - dir;
    }
    return cs;
}

TriggerState trigger(const MeasVec& z, const TriggerState& ts_in, int k, const MeasurementModel& model) {
    TriggerState ts = ts_in;
    if (!ts.has_reference) {
        ts.gamma = 1;
        ts.z_tau = z;
        ts.tau = k;
        ts.has_reference = true;
        return ts;
    }
    const MeasVec d = model.wrap_residual(z - ts.z_tau);
    const double metric = (d.array().square() * ts.weights.array()).sum();
    if (metric > ts.delta) {
        ts.gamma = 1;
        ts.z_tau = z;
        ts.tau = k;
    } else {
        ts.gamma = 0;
    }
    return ts;
}

EstimatePair ckf_predict(const EstimatePair& p, const DynamicsModel& f, double dt, const StateMat& Q) {
    CubatureSet cs = cubature_points(p);
    StateVec mean = StateVec::Zero();
    for (auto& pt : cs.points) {
        pt = f.step(pt, dt);
        mean += pt;
    }
    mean *= cs.weight;

    StateMat P = Q;
    for (const auto& pt : cs.points) {
        const StateVec d = pt - mean;
        P.noalias() += cs.weight * d * d.transpose();
    }
    return EstimatePair{mean, symmetrized(P)};
}

UpdateWorkspace cubature_measurement_moments(const EstimatePair& prior, const MeasurementModel& h,
                                             const MeasMat& R) {
    const CubatureSet cs = cubature_points(prior);
    const MeasVec z_ref = h.observe(prior.xhat);

    std::array<MeasVec, 2 * kN> zpts;
    MeasVec zbar = MeasVec::Zero();
    for (std::size_t r = 0; r < zpts.size(); ++r) {
        // Re-branch each propagated point around the reference so angular
        // channels near +-pi average correctly.
        zpts[r] = z_ref + h.wrap_residual(h.observe(cs.points[r]) - z_ref);
        zbar += zpts[r];
    }
    zbar *= cs.weight;

    UpdateWorkspace w;
    w.zhat = zbar;
    MeasMat Pzz = R;
    CrossMat Pxz = CrossMat::Zero();
    for (std::size_t r = 0; r < zpts.size(); ++r) {
        const MeasVec dz = zpts[r] - zbar;
        const StateVec dx = cs.points[r] - prior.xhat;
        Pzz.noalias() += cs.weight * dz * dz.transpose();
        Pxz.noalias() += cs.weight * dx * dz.transpose();
    }
    w.Pzz = symmetrized(Pzz);
    w.Pxz = Pxz;

    Eigen::LLT<MeasMat> llt;
    solve_pd(w.Pzz, "ckf_update: innovation covariance", &llt);
    w.K = llt.solve(w.Pxz.transpose()).transpose();
    return w;
}

std::pair<EstimatePair, UpdateWorkspace> ckf_update(const EstimatePair& prior, const MeasVec& z,
                                                     const MeasurementModel& h, const MeasMat& R) {
    UpdateWorkspace w = cubature_measurement_moments(prior, h, R);
    const MeasVec innovation = h.wrap_residual(z - w.zhat);
    EstimatePair post;
    post.xhat = prior.xhat + w.K * innovation;
    post.P = symmetrized(prior.P - w.K * w.Pzz * w.K.transpose());
    return {post, w};
}

InfoContribution info_contribution(const InfoPair& prior_info, const EstimatePair& prior,
                                   UpdateWorkspace& w, const MeasVec& z,
                                   const MeasurementModel& model) {
    w.H = w.Pxz.transpose() * prior_info.Y;
    w.D = symmetrized(w.Pzz - w.H * w.Pxz);

    Eigen::LLT<MeasMat> llt(w.D);
    if (llt.info() != Eigen::Success) {
        throw FilterError("info_contribution: D is not positive definite");
    }
    const MeasVec dz = model.wrap_residual(z - w.zhat);

    InfoContribution c;
    c.i_vec = w.H.transpose() * llt.solve(dz + w.H * prior.xhat);
    c.I_mat = symmetrized(w.H.transpose() * llt.solve(w.H));
    return c;
}

EtWorkspace et_gain(const StateMat& P_prior, const JacobianMat& G, const MeasMat& R, double delta,
                    const ScalingParams& sp) {
    const double mu1 = sp.mu1();
    const double mu2 = sp.mu2();
    const double mu3 = sp.mu3();

    EtWorkspace et;
    et.G = G;
    et.S = symmetrized(mu1 * G * P_prior * G.transpose() + mu2 * R +
                       mu3 * delta * MeasMat::Identity());
    Eigen::LLT<MeasMat> llt(et.S);
    if (llt.info() != Eigen::Success) {
        throw FilterError("et_gain: S is not positive definite");
    }
    // M = mu1 * P * G^T * S^-1, computed as (S^-1 G P)^T.
    et.M = mu1 * llt.solve(G * P_prior).transpose();
    et.A = StateMat::Identity() - et.M * G;
    et.Pbar = symmetrized(mu1 * et.A * P_prior * et.A.transpose() +
                          mu2 * et.M * R * et.M.transpose() +
                          mu3 * delta * et.M * et.M.transpose());
    const StateMat MG = et.M * G;
    et.N = symmetrized((sp.sigma1 * StateMat::Identity() - mu1 * MG) * P_prior -
                       mu1 * P_prior * MG.transpose() + et.M * et.S * et.M.transpose());
    et.Kbar = et.M;
    return et;
}

InfoContribution et_info_contribution(int gamma, const InfoPair& prior_info,
                                      const EstimatePair& prior, UpdateWorkspace& w,
                                      const EtWorkspace& et, const MeasVec& z_tau,
                                      const ScalingParams& sp, const MeasurementModel& model) {
    if (gamma == 1) {
        return info_contribution(prior_info, prior, w, z_tau, model);
    }

    Eigen::FullPivLU<StateMat> n_lu(et.N);
    if (!n_lu.isInvertible()) {
        throw FilterError("et_info_contribution: N is singular");
    }
    // (N^-1 + Y)^-1 = (I + N Y)^-1 N, which avoids forming N^-1 explicitly.
    Eigen::FullPivLU<StateMat> lu(StateMat::Identity() + et.N * prior_info.Y);
    if (!lu.isInvertible()) {
        throw FilterError("et_info_contribution: N^-1 + Y is singular");
    }
    const StateMat W = symmetrized(lu.solve(et.N));

    InfoContribution c;
    c.I_mat = symmetrized(-prior_info.Y * W * prior_info.Y);

    Eigen::LLT<MeasMat> s_llt(et.S);
    if (s_llt.info() != Eigen::Success) {
        throw FilterError("et_info_contribution: S is not positive definite");
    }
    const MeasVec dz_bar = model.wrap_residual(z_tau - w.zhat);
    c.i_vec = sp.mu1() * et.G.transpose() * s_llt.solve(dz_bar) +
              c.I_mat * (prior.xhat + et.M * dz_bar);

    Eigen::LLT<StateMat> post_llt(symmetrized(prior_info.Y + c.I_mat));
    if (post_llt.info() != Eigen::Success) {
        throw FilterError(
            "et_info_contribution: non-triggered update lost positive definiteness");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Node drivers
// ---------------------------------------------------------------------------

namespace {

TriggerState advance_trigger(const MeasVec& z, const TriggerState& ts_in, int k, bool enabled,
                             const CompensationSpec& comp, const MeasMat& comp_sqrt,
                             RngStream* comp_rng, const MeasurementModel& model) {
    TriggerState ts = ts_in;
    if (!enabled) {
        ts.gamma = 1;
        ts.z_tau = z;
        ts.tau = k;
        ts.has_reference = true;
        return ts;
    }
    ts = trigger(z, ts, k, model);
    if (ts.gamma == 0 && comp.enabled && comp_rng != nullptr) {
        MeasVec g;
        for (int i = 0; i < kMeasDim; ++i) {
            g(i) = comp_rng->gaussian();
        }
        ts.z_tau += comp_sqrt * g;
    }
    return ts;
}

}  // namespace

EtCifNode::EtCifNode(const EstimatePair& init, const DynamicsModel* f, MeasurementModel* h,
                     const NodeParams& params)
    : est_(init), info_(to_info(init)), f_(f), h_(h), params_(params) {
    trig_.delta = params_.delta;
    trig_.weights = params_.trigger_weights;
}

StepResult EtCifNode::local_phase(const MeasVec& z, int k, RngStream* comp_rng) {
    StepResult r;
    r.prior = ckf_predict(est_, *f_, params_.dt, params_.Q);
    r.prior_info = to_info(r.prior);
    UpdateWorkspace w = cubature_measurement_moments(r.prior, *h_, params_.R);

    MeasMat comp_sqrt = MeasMat::Zero();
    if (params_.compensation.enabled) {
        comp_sqrt = detail::psd_matrix_sqrt<kMeasDim>(params_.compensation.Sigma, "compensation");
    }
    trig_ = advance_trigger(z, trig_, k, params_.trigger_enabled, params_.compensation, comp_sqrt,
                            comp_rng, *h_);
    r.gamma = trig_.gamma;
    r.trig = trig_;

    if (r.gamma == 1) {
        r.contrib = info_contribution(r.prior_info, r.prior, w, trig_.z_tau, *h_);
    } else {
        const JacobianMat G = h_->jacobian(r.prior.xhat);
        const EtWorkspace et = et_gain(r.prior.P, G, params_.R, params_.delta, params_.scaling);
        r.contrib = et_info_contribution(0, r.prior_info, r.prior, w, et, trig_.z_tau,
                                         params_.scaling, *h_);
    }
    return r;
}

void EtCifNode::commit(const InfoPair& posterior_info, const EstimatePair& posterior) {
    info_ = posterior_info;
    est_ = posterior;
}

StepResult EtCifNode::step(const MeasVec& z, int k, RngStream* comp_rng) {
    StepResult r = local_phase(z, k, comp_rng);
    // Both terms are exactly symmetric, so the additive update is kept
    // verbatim (posterior Y is bit-for-bit prior Y plus the contribution).
    r.posterior_info.yhat = r.prior_info.yhat + r.contrib.i_vec;
    r.posterior_info.Y = r.prior_info.Y + r.contrib.I_mat;
    r.posterior = from_info(r.posterior_info);
    commit(r.posterior_info, r.posterior);
    return r;
}

MomentFilterNode::MomentFilterNode(MomentKind kind, const EstimatePair& init,
                                   const DynamicsModel* f, MeasurementModel* h,
                                   const NodeParams& params)
    : kind_(kind), est_(init), f_(f), h_(h), params_(params) {
    trig_.delta = params_.delta;
    trig_.weights = params_.trigger_weights;
}

void MomentFilterNode::set_state(const EstimatePair& p) { est_ = p; }

std::pair<EstimatePair, UpdateWorkspace> MomentFilterNode::predict_and_moments(const MeasVec&) {
    if (kind_ == MomentKind::Ckf) {
        EstimatePair prior = ckf_predict(est_, *f_, params_.dt, params_.Q);
        UpdateWorkspace w = cubature_measurement_moments(prior, *h_, params_.R);
        return {prior, w};
    }
    if (kind_ == MomentKind::Ekf) {
        EstimatePair prior;
        prior.xhat = f_->step(est_.xhat, params_.dt);
        const StateMat F = f_->jacobian(est_.xhat, params_.dt);
        prior.P = symmetrized(F * est_.P * F.transpose() + params_.Q);

        UpdateWorkspace w;
        w.zhat = h_->observe(prior.xhat);
        const JacobianMat G = h_->jacobian(prior.xhat);
        w.H = G;
        w.Pxz = prior.P * G.transpose();
        w.Pzz = symmetrized(G * w.Pxz + params_.R);
        Eigen::LLT<MeasMat> llt;
        solve_pd(w.Pzz, "ekf_step: innovation covariance", &llt);
        w.K = llt.solve(w.Pxz.transpose()).transpose();
        return {prior, w};
    }

    // UKF: 2n+1 sigma points with the configured spread.
    const double n = static_cast<double>(kN);
    const double lambda =
        params_.ukf.alpha * params_.ukf.alpha * (n + params_.ukf.kappa) - n;
    const double c = n + lambda;
    if (c <= 0.0) {
        throw ConfigError("ukf_step: alpha/kappa yield a nonpositive sigma-point spread");
    }
    const double s = std::sqrt(c);
    const double wm0 = lambda / c;
    const double wc0 = wm0 + (1.0 - params_.ukf.alpha * params_.ukf.alpha + params_.ukf.beta);
    const double wi = 1.0 / (2.0 * c);

    const auto make_points = [&](const EstimatePair& p) {
        std::array<StateVec, 2 * kN + 1> pts;
        const StateMat L = cholesky_with_repair(p.P, "ukf_step");
        pts[0] = p.xhat;
        for (int i = 0; i < kN; ++i) {
            pts[static_cast<std::size_t>(1 + i)] = p.xhat + s * L.col(i);
            pts[static_cast<std::size_t>(1 + kN + i)] = p.xhat - s * L.col(i);
        }
        return pts;
    };

    auto pts = make_points(est_);
    EstimatePair prior;
    prior.xhat = StateVec::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pts[i] = f_->step(pts[i], params_.dt);
        prior.xhat += (i == 0 ? wm0 : wi) * pts[i];
    }
    StateMat P = params_.Q;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const StateVec d = pts[i] - prior.xhat;
        P.noalias() += (i == 0 ? wc0 : wi) * d * d.transpose();
    }
    prior.P = symmetrized(P);

    const auto zpts_src = make_points(prior);
    const MeasVec z_ref = h_->observe(prior.xhat);
    std::array<MeasVec, 2 * kN + 1> zpts;
    MeasVec zbar = MeasVec::Zero();
    for (std::size_t i = 0; i < zpts.size(); ++i) {
        zpts[i] = z_ref + h_->wrap_residual(h_->observe(zpts_src[i]) - z_ref);
        zbar += (i == 0 ? wm0 : wi) * zpts[i];
    }
    UpdateWorkspace w;
    w.zhat = zbar;
    MeasMat Pzz = params_.R;
    CrossMat Pxz = CrossMat::Zero();
    for (std::size_t i = 0; i < zpts.size(); ++i) {
        const MeasVec dz = zpts[i] - zbar;
        const StateVec dx = zpts_src[i] - prior.xhat;
        const double wc = (i == 0 ? wc0 : wi);
        Pzz.noalias() += wc * dz * dz.transpose();
        Pxz.noalias() += wc * dx * dz.transpose();
    }
    w.Pzz = symmetrized(Pzz);
    w.Pxz = Pxz;
    Eigen::LLT<MeasMat> llt;
    solve_pd(w.Pzz, "ukf_step: innovation covariance", &llt);
    w.K = llt.solve(w.Pxz.transpose()).transpose();
    return {prior, w};
}

StepResult MomentFilterNode::step(const MeasVec& z, int k, RngStream* comp_rng) {
    StepResult r;
    auto [prior, w] = predict_and_moments(z);
    r.prior = prior;
    r.prior_info = to_info(prior);

    MeasMat comp_sqrt = MeasMat::Zero();
    if (params_.compensation.enabled) {
        comp_sqrt = detail::psd_matrix_sqrt<kMeasDim>(params_.compensation.Sigma, "compensation");
    }
    trig_ = advance_trigger(z, trig_, k, params_.trigger_enabled, params_.compensation, comp_sqrt,
                            comp_rng, *h_);
    r.gamma = trig_.gamma;
    r.trig = trig_;

    EstimatePair post;
    if (r.gamma == 1) {
        const MeasVec innovation = h_->wrap_residual(trig_.z_tau - w.zhat);
        post.xhat = prior.xhat + w.K * innovation;
        if (kind_ == MomentKind::Ekf) {
            // Joseph form keeps the linearized update symmetric PSD.
            const StateMat IKG = StateMat::Identity() - w.K * w.H;
            post.P = symmetrized(IKG * prior.P * IKG.transpose() +
                                 w.K * params_.R * w.K.transpose());
        } else {
            post.P = symmetrized(prior.P - w.K * w.Pzz * w.K.transpose());
        }
    } else {
        const JacobianMat G = h_->jacobian(prior.xhat);
        EtWorkspace et = et_gain(prior.P, G, params_.R, params_.delta, params_.scaling);
        et.Kbar = et.M;
        const MeasVec dz_bar = h_->wrap_residual(trig_.z_tau - w.zhat);
        post.xhat = prior.xhat + et.M * dz_bar;
        post.P = et.Pbar;
    }

    r.posterior = post;
    r.posterior_info = to_info(post);
    r.contrib.i_vec = r.posterior_info.yhat - r.prior_info.yhat;
    r.contrib.I_mat = r.posterior_info.Y - r.prior_info.Y;
    est_ = post;
    return r;
}

}  // namespace swarmtrack
