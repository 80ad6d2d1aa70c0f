#pragma once

#include "swarmtrack/network.hpp"
#include "swarmtrack/types.hpp"

#include <vector>

namespace swarmtrack {

/// Fused estimate in both parameterizations.
struct FusedEstimate {
    StateVec xhat_fus = StateVec::Zero();
    StateMat P_fus = StateMat::Identity();
    StateVec yhat_fus = StateVec::Zero();
    StateMat Y_fus = StateMat::Identity();
};

struct ConsensusConfig {
    int L = 5;
    Eigen::MatrixXd weights;  // row-stochastic, sparsity matching the graph
};

/// Adaptation stage: add the node's own information contribution and its
/// neighbors' to the prior information pair. Throws FusionError when the
/// resulting information matrix loses positive definiteness.
InfoPair diffuse_adapt(const InfoPair& prior_info, const InfoContribution& own,
                       const std::vector<InfoContribution>& nbrs);

/// Combination stage, plain convex form: weighted average of estimates and
/// covariances. Weights must be nonnegative and sum to 1.
FusedEstimate diffuse_combine_convex(const std::vector<EstimatePair>& pairs,
                                     const std::vector<double>& weights_row);

/// Combination stage with covariance intersection: convex combination of the
/// inverse covariances, consistent under unknown cross-correlations.
FusedEstimate ci_combine(const std::vector<EstimatePair>& pairs,
                         const std::vector<double>& weights_row);

/// L synchronous rounds of weighted neighbor averaging of information pairs.
/// Per round each node receives one pair per neighbor; the optional counters
/// accumulate the received scalar volumes (vector and triangular-matrix
/// channels) per node.
std::vector<InfoPair> consensus_fuse(const std::vector<InfoPair>& info_pairs, const Graph& g,
                                     const ConsensusConfig& cfg,
                                     std::vector<long long>* vec_scalars = nullptr,
                                     std::vector<long long>* mat_scalars = nullptr);

}  // namespace swarmtrack
