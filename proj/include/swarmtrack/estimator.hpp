#pragma once

#include "swarmtrack/models.hpp"
#include "swarmtrack/rng.hpp"
#include "swarmtrack/types.hpp"

#include <array>
#include <optional>
#include <utility>

namespace swarmtrack {

/// Third-degree spherical-radial cubature set: 2n points, uniform weights.
struct CubatureSet {
    std::array<StateVec, 2 * kStateDim> points;
    double weight = 1.0 / (2.0 * kStateDim);
};

/// Lower-triangular square root of P. A failed factorization is retried once
/// with jitter 1e-9*tr(P)/n on the diagonal; a second failure throws.
StateMat cholesky_with_repair(const StateMat& P, const char* what);

CubatureSet cubature_points(const EstimatePair& p);

/// Scaling parameters of the non-triggered covariance bound.
struct ScalingParams {
    double sigma1 = 5e-4;
    double sigma2 = 5e-4;

    ScalingParams() = default;
    ScalingParams(double s1, double s2) : sigma1(s1), sigma2(s2) {
        if (s1 <= 0.0 || s2 <= 0.0) {
            throw ConfigError("scaling parameters must be positive");
        }
    }
    double mu1() const { return 1.0 + sigma1; }
    double mu2() const { return 1.0 + sigma2; }
    double mu3() const { return 1.0 + 1.0 / sigma1 + 1.0 / sigma2; }
};

/// Send-on-delta trigger bookkeeping for one sensor-to-estimator link.
struct TriggerState {
    MeasVec z_tau = MeasVec::Zero();  // last transmitted measurement
    int tau = 0;                      // instant of the last transmission
    int gamma = 0;                    // flag of the most recent evaluation
    double delta = 0.04;              // threshold
    bool has_reference = false;       // first measurement always transmits
    MeasVec weights = MeasVec::Ones();  // optional per-channel normalization
};

/// Evaluate the trigger for measurement z at instant k and update the held
/// measurement. Angle channels of z - z_tau are wrapped before squaring.
TriggerState trigger(const MeasVec& z, const TriggerState& ts, int k, const MeasurementModel& model);

/// Byproducts of the cubature measurement update.
struct UpdateWorkspace {
    MeasVec zhat = MeasVec::Zero();   // predicted measurement
    MeasMat Pzz = MeasMat::Identity();
    CrossMat Pxz = CrossMat::Zero();
    CrossMat K = CrossMat::Zero();
    MeasMat D = MeasMat::Zero();      // filled by the information path
    JacobianMat H = JacobianMat::Zero();  // pseudo measurement matrix, filled likewise
};

/// Byproducts of the non-triggered gain construction.
struct EtWorkspace {
    JacobianMat G = JacobianMat::Zero();
    CrossMat M = CrossMat::Zero();    // non-triggered gain
    StateMat A = StateMat::Identity();
    MeasMat S = MeasMat::Identity();
    StateMat N = StateMat::Zero();
    StateMat Pbar = StateMat::Zero();  // covariance upper bound
    CrossMat Kbar = CrossMat::Zero();  // effective gain of the step
};

EstimatePair ckf_predict(const EstimatePair& p, const DynamicsModel& f, double dt, const StateMat& Q);

std::pair<EstimatePair, UpdateWorkspace> ckf_update(const EstimatePair& prior, const MeasVec& z,
                                                     const MeasurementModel& h, const MeasMat& R);

/// Measurement moments only (zhat, Pzz, Pxz) of the cubature update stage.
UpdateWorkspace cubature_measurement_moments(const EstimatePair& prior, const MeasurementModel& h,
                                             const MeasMat& R);

/// Information contribution of a transmitted measurement; also fills w.D and
/// w.H. The residual z - w.zhat is wrapped through the model.
InfoContribution info_contribution(const InfoPair& prior_info, const EstimatePair& prior,
                                   UpdateWorkspace& w, const MeasVec& z,
                                   const MeasurementModel& model);

/// Non-triggered gain minimizing the trace of the covariance upper bound,
/// together with the bound itself and the N matrix of the information path.
EtWorkspace et_gain(const StateMat& P_prior, const JacobianMat& G, const MeasMat& R, double delta,
                    const ScalingParams& sp);

/// Information contribution under the event-triggered mechanism. gamma = 1
/// reduces exactly to info_contribution; gamma = 0 builds the bound-based
/// inflation terms from the EtWorkspace. Throws when Y_prior + I_mat loses
/// positive definiteness (surfaced, not repaired).
InfoContribution et_info_contribution(int gamma, const InfoPair& prior_info,
                                      const EstimatePair& prior, UpdateWorkspace& w,
                                      const EtWorkspace& et, const MeasVec& z_tau,
                                      const ScalingParams& sp, const MeasurementModel& model);

/// Gaussian compensation of the held measurement between triggers.
struct CompensationSpec {
    bool enabled = false;
    MeasMat Sigma = MeasMat::Zero();
};

struct UkfParams {
    double alpha = 1.0;
    double beta = 2.0;
    double kappa = 3.0 - kStateDim;
};

/// Everything a local filter needs besides its state.
struct NodeParams {
    double dt = 0.1;
    StateMat Q = StateMat::Zero();
    MeasMat R = MeasMat::Identity();
    double delta = 0.04;
    ScalingParams scaling;
    bool trigger_enabled = true;
    CompensationSpec compensation;
    MeasVec trigger_weights = MeasVec::Ones();
    UkfParams ukf;
};

/// Uniform result shape of one local filter step.
struct StepResult {
    EstimatePair prior;
    InfoPair prior_info;
    InfoContribution contrib;
    int gamma = 1;
    EstimatePair posterior;
    InfoPair posterior_info;
    TriggerState trig;
};

/// Event-triggered cubature information filter at one node. local_phase()
/// stops after the information contribution so a fusion stage can complete
/// the update; step() commits the purely local recursion.
class EtCifNode {
public:
    EtCifNode(const EstimatePair& init, const DynamicsModel* f, MeasurementModel* h,
              const NodeParams& params);

    StepResult local_phase(const MeasVec& z, int k, RngStream* comp_rng = nullptr);
    void commit(const InfoPair& posterior_info, const EstimatePair& posterior);
    StepResult step(const MeasVec& z, int k, RngStream* comp_rng = nullptr);

    const EstimatePair& estimate() const { return est_; }
    const InfoPair& info() const { return info_; }
    const TriggerState& trigger_state() const { return trig_; }
    MeasurementModel* measurement_model() { return h_; }
    const NodeParams& params() const { return params_; }

private:
    EstimatePair est_;
    InfoPair info_;
    TriggerState trig_;
    const DynamicsModel* f_;
    MeasurementModel* h_;
    NodeParams params_;
};

enum class MomentKind { Ckf, Ekf, Ukf };

/// Moment-form local filter (CKF / EKF / UKF) with the same optional
/// event-triggered update; backs the consensus baselines.
class MomentFilterNode {
public:
    MomentFilterNode(MomentKind kind, const EstimatePair& init, const DynamicsModel* f,
                     MeasurementModel* h, const NodeParams& params);

    StepResult step(const MeasVec& z, int k, RngStream* comp_rng = nullptr);
    void set_state(const EstimatePair& p);

    const EstimatePair& estimate() const { return est_; }
    const TriggerState& trigger_state() const { return trig_; }
    MeasurementModel* measurement_model() { return h_; }
    MomentKind kind() const { return kind_; }

private:
    std::pair<EstimatePair, UpdateWorkspace> predict_and_moments(const MeasVec& z);

    MomentKind kind_;
    EstimatePair est_;
    TriggerState trig_;
    const DynamicsModel* f_;
    MeasurementModel* h_;
    NodeParams params_;
};

}  // namespace swarmtrack
