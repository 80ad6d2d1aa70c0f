#pragma once

#include "swarmtrack/types.hpp"

#include <utility>
#include <vector>

namespace swarmtrack {

/// Undirected, connected communication graph over the sensor nodes.
/// Immutable after construction and safe to share across threads.
class Graph {
public:
    Graph(int n_nodes, const std::vector<std::pair<int, int>>& edges);

    int size() const { return n_; }
    bool adjacent(int i, int j) const { return adj_[idx(i, j)]; }
    const std::vector<int>& neighbors(int i) const;
    int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
    int max_degree() const;

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }

    int n_ = 0;
    std::vector<char> adj_;
    std::vector<std::vector<int>> neighbors_;
};

Graph build_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges);

/// Row-stochastic diffusion weights: c[i][j] = 1/(1+Delta) for neighbors,
/// diagonal absorbs the remainder, zero elsewhere.
struct DiffusionWeights {
    Eigen::MatrixXd C;
};

DiffusionWeights diffusion_weights(const Graph& g);

/// Metropolis weights for the consensus baseline: w[i][j] = 1/(1+max(d_i,d_j))
/// on edges; doubly stochastic on undirected graphs.
Eigen::MatrixXd metropolis_weights(const Graph& g);

}  // namespace swarmtrack
