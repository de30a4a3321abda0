// Weighted undirected graphs, the combinatorial Laplacian, and the random
// graph models used by the synthetic experiments.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ockg/errors.hpp"
#include "ockg/rng.hpp"

namespace ockg {

struct Edge {
    int u;
    int v;
    double w;
};

class Graph {
  public:
    Graph(int node_count, std::vector<Edge> edges) : n_(node_count), edges_(std::move(edges)) {
        if (n_ <= 0) throw std::invalid_argument("Graph: node count must be positive");
        adj_.resize(n_);
        degree_.assign(n_, 0.0);
        std::set<std::pair<int, int>> seen;
        for (auto& e : edges_) {
            if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
                throw std::invalid_argument("Graph: node index out of range");
            if (e.u == e.v) throw std::invalid_argument("Graph: self-loops are not allowed");
            if (!(e.w > 0.0)) throw std::invalid_argument("Graph: edge weights must be positive");
            auto key = std::minmax(e.u, e.v);
            if (!seen.insert(key).second)
                throw std::invalid_argument("Graph: duplicate undirected edge");
            adj_[e.u].emplace_back(e.v, e.w);
            adj_[e.v].emplace_back(e.u, e.w);
            degree_[e.u] += e.w;
            degree_[e.v] += e.w;
        }
        for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    }

    int node_count() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::pair<int, double>>& neighbors(int v) const { return adj_.at(v); }
    double degree(int v) const { return degree_.at(v); }
    const std::vector<double>& degrees() const { return degree_; }

    double mean_degree() const {
        double s = 0.0;
        for (double d : degree_) s += d;
        return s / n_;
    }

    // diag(d) - W
    Eigen::MatrixXd laplacian() const {
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n_, n_);
        for (const auto& e : edges_) {
            lap(e.u, e.v) -= e.w;
            lap(e.v, e.u) -= e.w;
            lap(e.u, e.u) += e.w;
            lap(e.v, e.v) += e.w;
        }
        return lap;
    }

    bool connected() const {
        std::vector<char> visited(n_, 0);
        std::queue<int> q;
        q.push(0);
        visited[0] = 1;
        int count = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const auto& [u, w] : adj_[v]) {
                if (!visited[u]) {
                    visited[u] = 1;
                    ++count;
                    q.push(u);
                }
            }
        }
        return count == n_;
    }

    // Hop distances from s; unreachable nodes get -1.
    std::vector<int> hop_distances(int s) const {
        std::vector<int> dist(n_, -1);
        std::queue<int> q;
        dist.at(s) = 0;
        q.push(s);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const auto& [u, w] : adj_[v]) {
                if (dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    q.push(u);
                }
            }
        }
        return dist;
    }

    // Same node set with all coupling removed (the Pool configuration).
    Graph edgeless_copy() const { return Graph(n_, {}); }

  private:
    int n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<double> degree_;
};

// Stochastic block model with unit edge weights. Pairs inside a cluster
// connect with probability p_in, across clusters with p_out. Resamples
// until the graph is connected (at most max_attempts draws).
inline Graph sample_sbm(const std::vector<int>& cluster_sizes, double p_in, double p_out,
                        Rng& rng, int max_attempts = 100) {
    if (cluster_sizes.empty()) throw std::invalid_argument("sample_sbm: no clusters");
    for (int s : cluster_sizes)
        if (s <= 0) throw std::invalid_argument("sample_sbm: non-positive cluster size");
    if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
        throw std::invalid_argument("sample_sbm: probabilities must lie in [0,1]");

    int n = 0;
    for (int s : cluster_sizes) n += s;
    std::vector<int> label(n);
    {
        int offset = 0;
        for (std::size_t c = 0; c < cluster_sizes.size(); ++c) {
            for (int i = 0; i < cluster_sizes[c]; ++i) label[offset + i] = static_cast<int>(c);
            offset += cluster_sizes[c];
        }
    }

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<Edge> edges;
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                const double p = (label[u] == label[v]) ? p_in : p_out;
                if (rng.uniform() < p) edges.push_back({u, v, 1.0});
            }
        }
        Graph g(n, std::move(edges));
        if (g.connected()) return g;
    }
    throw numeric_error("sample_sbm: no connected sample after " + std::to_string(max_attempts) +
                        " attempts");
}

// Preferential-attachment tree: one new node per step, attached to an
// existing node with probability proportional to its degree. The first
// attachment is uniform (all degrees are still zero).
inline Graph sample_barabasi_albert(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("sample_barabasi_albert: need at least 2 nodes");
    std::vector<Edge> edges;
    edges.reserve(n - 1);
    std::vector<int> targets;  // every edge endpoint once; uniform draw == degree-proportional
    targets.reserve(2 * (n - 1));
    for (int v = 1; v < n; ++v) {
        int u;
        if (targets.empty()) {
            u = rng.uniform_int(0, v - 1);
        } else {
            u = targets[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(targets.size()) - 1))];
        }
        edges.push_back({u, v, 1.0});
        targets.push_back(u);
        targets.push_back(v);
    }
    return Graph(n, std::move(edges));
}

// Node ids of cluster c under the contiguous-block labeling used by sample_sbm.
inline std::vector<int> cluster_members(const std::vector<int>& cluster_sizes, int c) {
    if (c < 0 || c >= static_cast<int>(cluster_sizes.size()))
        throw std::invalid_argument("cluster_members: bad cluster index");
    int offset = 0;
    for (int i = 0; i < c; ++i) offset += cluster_sizes[i];
    std::vector<int> members(cluster_sizes[c]);
    for (int i = 0; i < cluster_sizes[c]; ++i) members[i] = offset + i;
    return members;
}

inline std::vector<int> select_affected_cluster(const std::vector<int>& cluster_sizes, Rng& rng) {
    if (cluster_sizes.empty()) throw std::invalid_argument("select_affected_cluster: no clusters");
    const int c = rng.uniform_int(0, static_cast<int>(cluster_sizes.size()) - 1);
    return cluster_members(cluster_sizes, c);
}

// Closed ball: seed plus all nodes within `radius` hops.
inline std::vector<int> ball_around(const Graph& g, int seed, int radius) {
    const auto dist = g.hop_distances(seed);
    std::vector<int> ball;
    for (int v = 0; v < g.node_count(); ++v)
        if (dist[v] >= 0 && dist[v] <= radius) ball.push_back(v);
    return ball;
}

// Seed node drawn with probability proportional to degree.
inline int sample_node_by_degree(const Graph& g, Rng& rng) {
    double total = 0.0;
    for (int v = 0; v < g.node_count(); ++v) total += g.degree(v);
    if (total <= 0.0) throw std::invalid_argument("sample_node_by_degree: graph has no edges");
    const double r = rng.uniform(0.0, total);
    double acc = 0.0;
    for (int v = 0; v < g.node_count(); ++v) {
        acc += g.degree(v);
        if (r < acc) return v;
    }
    return g.node_count() - 1;
}

inline std::vector<int> select_affected_ball(const Graph& g, int radius, Rng& rng) {
    return ball_around(g, sample_node_by_degree(g, rng), radius);
}

}  // namespace ockg
