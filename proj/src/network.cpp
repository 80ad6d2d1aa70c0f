#include "swarmtrack/network.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <string>

namespace swarmtrack {

Graph::Graph(int n_nodes, const std::vector<std::pair<int, int>>& edges) : n_(n_nodes) {
    if (n_ < 1) {
        throw ConfigError("graph needs at least one node");
    }
    adj_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n_ || b >= n_) {
            throw ConfigError("graph edge index out of range: (" + std::to_string(a) + ", " +
                              std::to_string(b) + ")");
        }
        if (a == b) {
            throw ConfigError("graph self-loop rejected at node " + std::to_string(a));
        }
        adj_[idx(a, b)] = 1;
        adj_[idx(b, a)] = 1;
    }

    neighbors_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (adj_[idx(i, j)]) {
                neighbors_[static_cast<std::size_t>(i)].push_back(j);
            }
        }
    }

    // Connectivity by BFS from node 0.
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::deque<int> frontier{0};
    seen[0] = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        for (int v : neighbors_[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                frontier.push_back(v);
            }
        }
    }
    std::vector<int> unreachable;
    for (int i = 0; i < n_; ++i) {
        if (!seen[static_cast<std::size_t>(i)]) {
            unreachable.push_back(i);
        }
    }
    if (!unreachable.empty()) {
        std::ostringstream msg;
        msg << "graph is disconnected; nodes {";
        for (std::size_t i = 0; i < unreachable.size(); ++i) {
            msg << (i ? ", " : "") << unreachable[i];
        }
        msg << "} are unreachable from node 0";
        throw ConfigError(msg.str());
    }
}

const std::vector<int>& Graph::neighbors(int i) const {
    if (i < 0 || i >= n_) {
        throw ConfigError("neighbor query out of range: " + std::to_string(i));
    }
    return neighbors_[static_cast<std::size_t>(i)];
}

int Graph::max_degree() const {
    int d = 0;
    for (int i = 0; i < n_; ++i) {
        d = std::max(d, degree(i));
    }
    return d;
}

Graph build_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
    return Graph(n_nodes, edges);
}

DiffusionWeights diffusion_weights(const Graph& g) {
    const int n = g.size();
    const double w = 1.0 / (1.0 + static_cast<double>(g.max_degree()));
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j : g.neighbors(i)) {
            C(i, j) = w;
            off += w;
        }
        C(i, i) = 1.0 - off;
    }
    return DiffusionWeights{std::move(C)};
}

Eigen::MatrixXd metropolis_weights(const Graph& g) {
    const int n = g.size();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j : g.neighbors(i)) {
            const double w = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(i), g.degree(j))));
            W(i, j) = w;
            off += w;
        }
        W(i, i) = 1.0 - off;
    }
    return W;
}

}  // namespace swarmtrack
