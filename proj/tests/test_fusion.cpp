#include "swarmtrack/fusion.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace swarmtrack;

namespace {

EstimatePair random_pair(RngStream& rng, double scale = 1.0) {
    EstimatePair p;
    for (int i = 0; i < kStateDim; ++i) {
        p.xhat(i) = 2.0 * rng.gaussian();
    }
    p.P = oracles::random_pd<kStateDim>(rng, scale);
    return p;
}

InfoContribution random_contrib(RngStream& rng) {
    InfoContribution c;
    for (int i = 0; i < kStateDim; ++i) {
        c.i_vec(i) = rng.gaussian();
    }
    c.I_mat = oracles::random_pd<kStateDim>(rng, 0.3);
    return c;
}

}  // namespace

TEST_CASE("diffuse_adapt: no neighbors reduces to the local update") {
    RngStream rng(11);
    const EstimatePair prior = random_pair(rng);
    const InfoPair prior_info = to_info(prior);
    const InfoContribution own = random_contrib(rng);

    const InfoPair out = diffuse_adapt(prior_info, own, {});
    CHECK((out.yhat - (prior_info.yhat + own.i_vec)).norm() == 0.0);
    CHECK((out.Y - symmetrized(prior_info.Y + own.I_mat)).norm() < 1e-15 * out.Y.norm());
}

TEST_CASE("diffuse_adapt: two identical neighbors double the neighbor term") {
    RngStream rng(12);
    const InfoPair prior_info = to_info(random_pair(rng));
    const InfoContribution own = random_contrib(rng);
    const InfoContribution nbr = random_contrib(rng);

    const InfoPair one = diffuse_adapt(prior_info, own, {nbr});
    const InfoPair two = diffuse_adapt(prior_info, own, {nbr, nbr});
    const StateVec extra = two.yhat - one.yhat;
    CHECK((extra - nbr.i_vec).norm() < 1e-12 * std::max(1.0, nbr.i_vec.norm()));
    CHECK((two.Y - one.Y - nbr.I_mat).norm() < 1e-12 * nbr.I_mat.norm());
}

TEST_CASE("diffuse_adapt: non-PD result is surfaced as FusionError") {
    RngStream rng(13);
    const InfoPair prior_info = to_info(random_pair(rng));
    InfoContribution own;
    own.I_mat = -2.0 * prior_info.Y;  // overwhelms the prior information
    CHECK_THROWS_AS(diffuse_adapt(prior_info, own, {}), FusionError);
}

TEST_CASE("diffuse_combine_convex: fixed point, passthrough, arithmetic mean") {
    RngStream rng(21);
    const EstimatePair a = random_pair(rng);
    const EstimatePair b = random_pair(rng);

    const FusedEstimate same = diffuse_combine_convex({a, a, a}, {0.25, 0.5, 0.25});
    CHECK((same.xhat_fus - a.xhat).norm() < 1e-12);
    CHECK((same.P_fus - a.P).norm() < 1e-12);

    const FusedEstimate pass = diffuse_combine_convex({a, b}, {1.0, 0.0});
    CHECK((pass.xhat_fus - a.xhat).norm() == 0.0);
    CHECK((pass.P_fus - a.P).norm() < 1e-15 * a.P.norm());

    const FusedEstimate mean = diffuse_combine_convex({a, b}, {0.5, 0.5});
    CHECK((mean.P_fus - 0.5 * (a.P + b.P)).norm() < 1e-12 * mean.P_fus.norm());

    CHECK_THROWS_AS(diffuse_combine_convex({a, b}, {0.7, 0.7}), FusionError);
    CHECK_THROWS_AS(diffuse_combine_convex({a, b}, {1.5, -0.5}), FusionError);
}

TEST_CASE("ci_combine: fixed point and the hand-computed two-node case") {
    RngStream rng(31);
    const EstimatePair a = random_pair(rng);
    const FusedEstimate same = ci_combine({a, a}, {0.5, 0.5});
    CHECK((same.xhat_fus - a.xhat).norm() < 1e-10 * std::max(1.0, a.xhat.norm()));
    CHECK((same.P_fus - a.P).norm() < 1e-10 * a.P.norm());

    // P1 = I, P2 = 3I with equal weights: Pfus = 1.5 I and the first
    // estimate carries three times the weight of the second.
    EstimatePair p1;
    p1.xhat = StateVec::Ones();
    p1.P = StateMat::Identity();
    EstimatePair p2;
    p2.xhat = 2.0 * StateVec::Ones();
    p2.P = 3.0 * StateMat::Identity();
    const FusedEstimate f = ci_combine({p1, p2}, {0.5, 0.5});
    CHECK((f.P_fus - 1.5 * StateMat::Identity()).norm() < 1e-12);
    // Direct formula evaluation: xfus = Pfus * (0.5*I*x1 + 0.5*(1/3)*x2).
    const StateVec expect = 1.5 * (0.5 * p1.xhat + 0.5 / 3.0 * p2.xhat);
    CHECK((f.xhat_fus - expect).norm() < 1e-12);

    // The information view equals the convex combination of the inputs'
    // information matrices.
    CHECK((f.Y_fus - (0.5 * p1.P.inverse() + 0.5 * p2.P.inverse())).norm() < 1e-12);
}

TEST_CASE("ci_combine: preserves PD and never exceeds the worst trace") {
    RngStream rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 2 + static_cast<int>(rng.raw() % 3);
        std::vector<EstimatePair> pairs;
        std::vector<double> weights;
        double sum = 0.0;
        for (int j = 0; j < m; ++j) {
            pairs.push_back(random_pair(rng, 0.5 + rng.uniform()));
            const double w = 0.05 + rng.uniform();
            weights.push_back(w);
            sum += w;
        }
        for (double& w : weights) {
            w /= sum;
        }
        // Renormalize exactly to survive the 1e-9 weight check.
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
            acc += weights[j];
        }
        weights.back() = 1.0 - acc;

        const FusedEstimate f = ci_combine(pairs, weights);
        CHECK(min_eigenvalue(f.P_fus) > 0.0);

        double worst = 0.0;
        for (const auto& p : pairs) {
            worst = std::max(worst, p.P.trace());
        }
        CHECK(f.P_fus.trace() <= worst + 1e-9);
    }
}

TEST_CASE("convex and CI combination agree when all covariances are equal") {
    RngStream rng(51);
    const StateMat P = oracles::random_pd<kStateDim>(rng);
    std::vector<EstimatePair> pairs;
    for (int j = 0; j < 3; ++j) {
        EstimatePair p;
        for (int i = 0; i < kStateDim; ++i) {
            p.xhat(i) = rng.gaussian();
        }
        p.P = P;
        pairs.push_back(p);
    }
    const std::vector<double> w = {0.2, 0.5, 0.3};
    const FusedEstimate a = diffuse_combine_convex(pairs, w);
    const FusedEstimate b = ci_combine(pairs, w);
    CHECK((a.xhat_fus - b.xhat_fus).norm() < 1e-10 * std::max(1.0, a.xhat_fus.norm()));
    CHECK((a.P_fus - b.P_fus).norm() < 1e-10 * a.P_fus.norm());
}

TEST_CASE("fusion is invariant under joint permutation of inputs and weights") {
    RngStream rng(61);
    std::vector<EstimatePair> pairs = {random_pair(rng), random_pair(rng), random_pair(rng)};
    std::vector<double> w = {0.5, 0.3, 0.2};
    const FusedEstimate a = ci_combine(pairs, w);
    const FusedEstimate b = ci_combine({pairs[2], pairs[0], pairs[1]}, {0.2, 0.5, 0.3});
    CHECK((a.xhat_fus - b.xhat_fus).norm() < 1e-12 * std::max(1.0, a.xhat_fus.norm()));
    CHECK((a.P_fus - b.P_fus).norm() < 1e-12 * a.P_fus.norm());
}

TEST_CASE("consensus_fuse: long-run average, identity weights, volume accounting") {
    const Graph ring = build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    RngStream rng(71);
    std::vector<InfoPair> pairs;
    for (int i = 0; i < 4; ++i) {
        pairs.push_back(to_info(random_pair(rng)));
    }

    // Metropolis weights on the ring are doubly stochastic, so many rounds
    // drive every node to the uniform average. Cross-check against explicit
    // powers of the averaging matrix.
    ConsensusConfig cfg{50, metropolis_weights(ring)};
    const auto fused = consensus_fuse(pairs, ring, cfg);

    InfoPair avg;
    avg.yhat = StateVec::Zero();
    avg.Y = StateMat::Zero();
    for (const auto& p : pairs) {
        avg.yhat += 0.25 * p.yhat;
        avg.Y += 0.25 * p.Y;
    }
    Eigen::MatrixXd Wp = Eigen::MatrixXd::Identity(4, 4);
    for (int r = 0; r < cfg.L; ++r) {
        Wp = cfg.weights * Wp;
    }
    for (int i = 0; i < 4; ++i) {
        CHECK((fused[static_cast<std::size_t>(i)].yhat - avg.yhat).norm() < 1e-6);
        CHECK((fused[static_cast<std::size_t>(i)].Y - avg.Y).norm() < 1e-6);
        StateVec power = StateVec::Zero();
        for (int j = 0; j < 4; ++j) {
            power += Wp(i, j) * pairs[static_cast<std::size_t>(j)].yhat;
        }
        CHECK((fused[static_cast<std::size_t>(i)].yhat - power).norm() < 1e-10);
    }

    // Identity-like weights leave the pairs unchanged.
    ConsensusConfig ident{1, Eigen::MatrixXd::Identity(4, 4)};
    const auto same = consensus_fuse(pairs, ring, ident);
    for (int i = 0; i < 4; ++i) {
        CHECK((same[static_cast<std::size_t>(i)].yhat - pairs[static_cast<std::size_t>(i)].yhat)
                  .norm() == 0.0);
    }

    // Volume accounting: n*L*|N_i| per node on the vector channel.
    std::vector<long long> vec(4, 0);
    std::vector<long long> mat(4, 0);
    ConsensusConfig counted{5, metropolis_weights(ring)};
    consensus_fuse(pairs, ring, counted, &vec, &mat);
    for (int i = 0; i < 4; ++i) {
        CHECK(vec[static_cast<std::size_t>(i)] == 7LL * 5 * 2);
        CHECK(mat[static_cast<std::size_t>(i)] == 28LL * 5 * 2);
    }
}
