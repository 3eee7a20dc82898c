#include "lgh/topology.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

#include "lgh/errors.hpp"
#include "lgh/rng.hpp"

namespace lgh {

bool Adjacency::contains_edge(int m, int k) const {
    const auto& nk = neighbor_sets[k];
    return std::binary_search(nk.begin(), nk.end(), m);
}

std::vector<int> Adjacency::non_self_neighbors(int k) const {
    std::vector<int> out;
    out.reserve(neighbor_sets[k].size());
    for (int m : neighbor_sets[k])
        if (m != k) out.push_back(m);
    return out;
}

GraphModel parse_graph_model(const std::string& name) {
    if (name == "erdos_renyi") return GraphModel::erdos_renyi;
    if (name == "ring") return GraphModel::ring;
    if (name == "star") return GraphModel::star;
    if (name == "complete") return GraphModel::complete;
    throw ConfigError("unknown graph model: " + name);
}

const char* to_string(GraphModel model) {
    switch (model) {
        case GraphModel::erdos_renyi: return "erdos_renyi";
        case GraphModel::ring: return "ring";
        case GraphModel::star: return "star";
        case GraphModel::complete: return "complete";
    }
    return "?";
}

namespace {

// Connectivity over non-self edges; a single agent counts as connected.
bool connected(const Adjacency& adj) {
    if (adj.num_agents <= 1) return adj.num_agents == 1;
    std::vector<char> seen(adj.num_agents, 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int w : adj.neighbor_sets[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                frontier.push(w);
            }
        }
    }
    return reached == adj.num_agents;
}

Adjacency from_edges(int num_agents, const std::vector<std::pair<int, int>>& edges) {
    Adjacency adj;
    adj.num_agents = num_agents;
    adj.neighbor_sets.assign(num_agents, {});
    for (int k = 0; k < num_agents; ++k) adj.neighbor_sets[k].push_back(k);
    for (auto [u, v] : edges) {
        adj.neighbor_sets[u].push_back(v);
        adj.neighbor_sets[v].push_back(u);
    }
    for (auto& set : adj.neighbor_sets) {
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    return adj;
}

}  // namespace

void validate_adjacency(const Adjacency& adj) {
    if (adj.num_agents < 1 || static_cast<int>(adj.neighbor_sets.size()) != adj.num_agents)
        throw ConfigError("adjacency: inconsistent agent count");
    for (int k = 0; k < adj.num_agents; ++k) {
        if (!adj.contains_edge(k, k)) throw ConfigError("adjacency: missing self-loop");
        for (int m : adj.neighbor_sets[k]) {
            if (m < 0 || m >= adj.num_agents) throw ConfigError("adjacency: index out of range");
            if (!adj.contains_edge(k, m)) throw ConfigError("adjacency: not symmetric");
        }
    }
    if (!connected(adj)) throw ConfigError("adjacency: graph is not connected");
}

void validate_combination_matrix(const CombinationMatrix& a, const Adjacency& adj, double tol) {
    const int n = a.num_agents;
    if (n != adj.num_agents || a.entries.size() != static_cast<size_t>(n) * n)
        throw ConfigError("combination matrix: wrong shape");
    for (int m = 0; m < n; ++m) {
        double row = 0.0, col = 0.0;
        for (int k = 0; k < n; ++k) {
            if (a(m, k) != a(k, m)) throw ConfigError("combination matrix: not symmetric");
            const bool edge = adj.contains_edge(m, k);
            if (edge && !(a(m, k) > 0.0))
                throw ConfigError("combination matrix: zero weight on an edge");
            if (!edge && a(m, k) != 0.0)
                throw ConfigError("combination matrix: weight off the graph support");
            row += a(m, k);
            col += a(k, m);
        }
        if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol)
            throw ConfigError("combination matrix: row/column sum off by more than tol");
    }
}

Adjacency build_graph(int num_agents, GraphModel model, double edge_prob, uint64_t seed,
                      int* er_retries) {
    if (num_agents < 2) throw ConfigError("build_graph: need at least 2 agents");
    if (er_retries) *er_retries = 0;

    std::vector<std::pair<int, int>> edges;
    switch (model) {
        case GraphModel::ring:
            for (int k = 0; k < num_agents; ++k) {
                const int next = (k + 1) % num_agents;
                if (next != k) edges.emplace_back(k, next);
            }
            return from_edges(num_agents, edges);
        case GraphModel::star:
            for (int k = 1; k < num_agents; ++k) edges.emplace_back(0, k);
            return from_edges(num_agents, edges);
        case GraphModel::complete:
            for (int u = 0; u < num_agents; ++u)
                for (int v = u + 1; v < num_agents; ++v) edges.emplace_back(u, v);
            return from_edges(num_agents, edges);
        case GraphModel::erdos_renyi:
            break;
    }

    if (!(edge_prob > 0.0 && edge_prob <= 1.0))
        throw ConfigError("build_graph: erdos_renyi needs 0 < p <= 1");
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(derive_seed(seed + static_cast<uint64_t>(attempt), seed_tag::graph));
        edges.clear();
        for (int u = 0; u < num_agents; ++u)
            for (int v = u + 1; v < num_agents; ++v)
                if (rng.uniform01() <= edge_prob) edges.emplace_back(u, v);
        Adjacency adj = from_edges(num_agents, edges);
        if (connected(adj)) {
            if (er_retries) *er_retries = attempt;
            return adj;
        }
    }
    throw ConfigError("build_graph: no connected graph after 1000 attempts");
}

CombinationMatrix metropolis_weights(const Adjacency& adj) {
    const int n = adj.num_agents;
    CombinationMatrix a;
    a.num_agents = n;
    a.entries.assign(static_cast<size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        for (int m : adj.neighbor_sets[k]) {
            if (m <= k) continue;
            const double w = 1.0 / std::max(adj.degree(m), adj.degree(k));
            a.at(m, k) = w;
            a.at(k, m) = w;
        }
    }
    for (int k = 0; k < n; ++k) {
        double off = 0.0;
        for (int m : adj.neighbor_sets[k])
            if (m != k) off += a(m, k);
        a.at(k, k) = 1.0 - off;
    }
    return a;
}

NeighborhoodSplit split_neighborhood(int k, const Adjacency& adj, uint64_t seed) {
    std::vector<int> others = adj.non_self_neighbors(k);
    if (others.empty())
        throw ProtocolError("split_neighborhood: agent " + std::to_string(k) +
                            " has no neighbors");
    Rng rng(derive_seed(seed, seed_tag::split, static_cast<uint64_t>(k)));
    for (size_t i = others.size(); i > 1; --i) {
        const size_t j = rng.uniform_below(i);
        std::swap(others[i - 1], others[j]);
    }
    NeighborhoodSplit split;
    split.agent = k;
    for (size_t pos = 0; pos < others.size(); ++pos)
        (pos % 2 == 0 ? split.positive : split.negative).push_back(others[pos]);
    std::sort(split.positive.begin(), split.positive.end());
    std::sort(split.negative.begin(), split.negative.end());
    return split;
}

void write_edge_list(const Adjacency& adj, std::ostream& out) {
    for (int k = 0; k < adj.num_agents; ++k)
        for (int m : adj.neighbor_sets[k])
            if (m > k) out << (k + 1) << ' ' << (m + 1) << '\n';
}

}  // namespace lgh
