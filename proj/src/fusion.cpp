#include "swarmtrack/fusion.hpp"

#include <cmath>
#include <string>

namespace swarmtrack {

namespace {

void check_weights(const std::vector<EstimatePair>& pairs, const std::vector<double>& weights) {
    if (pairs.empty() || pairs.size() != weights.size()) {
        throw FusionError("fusion weights must match the number of estimates");
    }
    double sum = 0.0;
    for (const double w : weights) {
        if (w < 0.0) {
            throw FusionError("fusion weights must be nonnegative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw FusionError("fusion weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

}  // namespace

InfoPair diffuse_adapt(const InfoPair& prior_info, const InfoContribution& own,
                       const std::vector<InfoContribution>& nbrs) {
    InfoPair out;
    out.yhat = prior_info.yhat + own.i_vec;
    out.Y = prior_info.Y + own.I_mat;
    for (const auto& c : nbrs) {
        out.yhat += c.i_vec;
        out.Y += c.I_mat;
    }
    out.Y = symmetrized(out.Y);

    Eigen::LLT<StateMat> llt(out.Y);
    if (llt.info() != Eigen::Success) {
        throw FusionError("diffuse_adapt: information matrix lost positive definiteness (min "
                          "eigenvalue " +
                          std::to_string(min_eigenvalue(out.Y)) + ")");
    }
    return out;
}

FusedEstimate diffuse_combine_convex(const std::vector<EstimatePair>& pairs,
                                     const std::vector<double>& weights_row) {
    check_weights(pairs, weights_row);
    FusedEstimate f;
    f.xhat_fus = StateVec::Zero();
    f.P_fus = StateMat::Zero();
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        f.xhat_fus += weights_row[j] * pairs[j].xhat;
        f.P_fus += weights_row[j] * pairs[j].P;
    }
    f.P_fus = symmetrized(f.P_fus);
    try {
        const InfoPair info = to_info(EstimatePair{f.xhat_fus, f.P_fus});
        f.yhat_fus = info.yhat;
        f.Y_fus = info.Y;
    } catch (const FilterError& e) {
        throw FusionError(std::string("diffuse_combine_convex: ") + e.what());
    }
    return f;
}

FusedEstimate ci_combine(const std::vector<EstimatePair>& pairs,
                         const std::vector<double>& weights_row) {
    check_weights(pairs, weights_row);
    FusedEstimate f;
    StateMat Y = StateMat::Zero();
    StateVec y = StateVec::Zero();
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (weights_row[j] == 0.0) {
            continue;
        }
        StateMat Yj;
        try {
            Yj = detail::invert_pd<kStateDim>(pairs[j].P, "ci_combine");
        } catch (const FilterError& e) {
            throw FusionError(std::string("ci_combine: estimate ") + std::to_string(j) + ": " +
                              e.what());
        }
        Y += weights_row[j] * Yj;
        y += weights_row[j] * (Yj * pairs[j].xhat);
    }
    f.Y_fus = symmetrized(Y);
    f.yhat_fus = y;
    try {
        const EstimatePair est = from_info(InfoPair{f.yhat_fus, f.Y_fus});
        f.xhat_fus = est.xhat;
        f.P_fus = est.P;
    } catch (const FilterError& e) {
        throw FusionError(std::string("ci_combine: ") + e.what());
    }
    return f;
}

std::vector<InfoPair> consensus_fuse(const std::vector<InfoPair>& info_pairs, const Graph& g,
                                     const ConsensusConfig& cfg,
                                     std::vector<long long>* vec_scalars,
                                     std::vector<long long>* mat_scalars) {
    if (cfg.L < 1) {
        throw FusionError("consensus_fuse: iteration count must be at least 1");
    }
    const int n = g.size();
    if (static_cast<int>(info_pairs.size()) != n || cfg.weights.rows() != n ||
        cfg.weights.cols() != n) {
        throw FusionError("consensus_fuse: size mismatch between pairs, graph, and weights");
    }

    constexpr long long kVecScalars = kStateDim;
    constexpr long long kMatScalars = kStateDim * (kStateDim + 1) / 2;

    std::vector<InfoPair> cur = info_pairs;
    std::vector<InfoPair> next(static_cast<std::size_t>(n));
    for (int round = 0; round < cfg.L; ++round) {
        for (int i = 0; i < n; ++i) {
            StateVec y = cfg.weights(i, i) * cur[static_cast<std::size_t>(i)].yhat;
            StateMat Y = cfg.weights(i, i) * cur[static_cast<std::size_t>(i)].Y;
            for (int j : g.neighbors(i)) {
                y += cfg.weights(i, j) * cur[static_cast<std::size_t>(j)].yhat;
                Y += cfg.weights(i, j) * cur[static_cast<std::size_t>(j)].Y;
            }
            next[static_cast<std::size_t>(i)] = InfoPair{y, symmetrized(Y)};
            if (vec_scalars != nullptr) {
                (*vec_scalars)[static_cast<std::size_t>(i)] += kVecScalars * g.degree(i);
            }
            if (mat_scalars != nullptr) {
                (*mat_scalars)[static_cast<std::size_t>(i)] += kMatScalars * g.degree(i);
            }
        }
        cur.swap(next);
    }
    return cur;
}

}  // namespace swarmtrack
