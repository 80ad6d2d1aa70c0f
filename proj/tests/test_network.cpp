#include "swarmtrack/network.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace swarmtrack;

namespace {

const std::vector<std::pair<int, int>> kRing4 = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
const std::vector<std::pair<int, int>> kStar4 = {{0, 1}, {0, 2}, {0, 3}};

}  // namespace

TEST_CASE("build_graph: ring, path, and disconnected cases") {
    const Graph ring = build_graph(4, kRing4);
    for (int i = 0; i < 4; ++i) {
        CHECK(ring.degree(i) == 2);
    }
    CHECK(ring.neighbors(0) == std::vector<int>{1, 3});

    const Graph path = build_graph(2, {{0, 1}});
    CHECK(path.degree(0) == 1);
    CHECK(path.neighbors(1) == std::vector<int>{0});

    CHECK_THROWS_WITH_AS(build_graph(4, {{0, 1}, {2, 3}}),
                         doctest::Contains("unreachable"), ConfigError);
    CHECK_THROWS_AS(build_graph(3, {{0, 0}}), ConfigError);
    CHECK_THROWS_AS(build_graph(3, {{0, 5}}), ConfigError);
}

TEST_CASE("neighbors are sorted and exclude the node itself") {
    const Graph star = build_graph(4, kStar4);
    CHECK(star.neighbors(0) == std::vector<int>{1, 2, 3});
    CHECK(star.neighbors(1) == std::vector<int>{0});
}

TEST_CASE("diffusion weights: ring and star values") {
    const Graph ring = build_graph(4, kRing4);
    const DiffusionWeights w = diffusion_weights(ring);
    // Delta = 2: neighbor weight 1/3, self weight 1 - 2/3 = 1/3.
    CHECK(w.C(0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(w.C(0, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(w.C(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(w.C(0, 2) == 0.0);

    const Graph star = build_graph(4, kStar4);
    const DiffusionWeights ws = diffusion_weights(star);
    // Delta = 3: every neighbor weight 1/4, hub self 1/4, leaf self 3/4.
    CHECK(ws.C(0, 1) == doctest::Approx(0.25));
    CHECK(ws.C(0, 0) == doctest::Approx(0.25));
    CHECK(ws.C(1, 0) == doctest::Approx(0.25));
    CHECK(ws.C(1, 1) == doctest::Approx(0.75));
}

TEST_CASE("diffusion weights: rows sum to one and match the sparsity pattern") {
    RngStream rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.raw() % 5);
        // Random connected graph: random spanning chain plus random extras.
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i + 1 < n; ++i) {
            edges.emplace_back(i, i + 1);
        }
        for (int e = 0; e < n; ++e) {
            const int a = static_cast<int>(rng.raw() % static_cast<unsigned>(n));
            const int b = static_cast<int>(rng.raw() % static_cast<unsigned>(n));
            if (a != b) {
                edges.emplace_back(a, b);
            }
        }
        const Graph g = build_graph(n, edges);
        const DiffusionWeights w = diffusion_weights(g);
        const Eigen::MatrixXd mw = metropolis_weights(g);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(w.C.row(i).sum() - 1.0) < 1e-12);
            CHECK(std::abs(mw.row(i).sum() - 1.0) < 1e-12);
            CHECK(std::abs(mw.col(i).sum() - 1.0) < 1e-12);  // doubly stochastic
            for (int j = 0; j < n; ++j) {
                CHECK(w.C(i, j) >= 0.0);
                CHECK(w.C(i, j) <= 1.0);
                if (i != j && !g.adjacent(i, j)) {
                    CHECK(w.C(i, j) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("connectivity check agrees with brute-force reachability up to n = 6") {
    for (int n = 2; n <= 6; ++n) {
        std::vector<std::pair<int, int>> all_edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                all_edges.emplace_back(i, j);
            }
        }
        const int m = static_cast<int>(all_edges.size());
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
            std::vector<std::pair<int, int>> edges;
            std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n),
                                               std::vector<bool>(static_cast<std::size_t>(n), false));
            for (int e = 0; e < m; ++e) {
                if (mask & (1u << e)) {
                    edges.push_back(all_edges[static_cast<std::size_t>(e)]);
                    const auto [a, b] = all_edges[static_cast<std::size_t>(e)];
                    adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
                    adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
                }
            }
            const bool expect = oracles::brute_force_connected(n, adj);
            bool got = true;
            try {
                build_graph(n, edges);
            } catch (const ConfigError&) {
                got = false;
            }
            REQUIRE(got == expect);
        }
    }
}
