#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lgh {

// Undirected graph over agents 0..K-1. Neighbor sets are sorted and every
// agent is a member of its own neighborhood.
struct Adjacency {
    int num_agents = 0;
    std::vector<std::vector<int>> neighbor_sets;

    // True iff m is in N_k.
    bool contains_edge(int m, int k) const;
    // |N_k|, counting the self-loop.
    int degree(int k) const { return static_cast<int>(neighbor_sets[k].size()); }
    // N_k \ {k}, sorted.
    std::vector<int> non_self_neighbors(int k) const;
};

enum class GraphModel { erdos_renyi, ring, star, complete };

GraphModel parse_graph_model(const std::string& name);
const char* to_string(GraphModel model);

// Throws ConfigError unless the adjacency has self-loops, is symmetric,
// and is connected through its non-self edges.
void validate_adjacency(const Adjacency& adj);

// Symmetric doubly-stochastic combination weights; entries(m,k) > 0 exactly
// when m is in N_k.
struct CombinationMatrix {
    int num_agents = 0;
    std::vector<double> entries;  // row-major K x K

    double operator()(int m, int k) const {
        return entries[static_cast<size_t>(m) * num_agents + k];
    }
    double& at(int m, int k) { return entries[static_cast<size_t>(m) * num_agents + k]; }
};

// Checks symmetry, support and row/column sums (within tol).
void validate_combination_matrix(const CombinationMatrix& a, const Adjacency& adj,
                                 double tol = 1e-12);

// Partition of N_k \ {k} into a noise-adding and a noise-subtracting side.
struct NeighborhoodSplit {
    int agent = -1;             // hub k
    std::vector<int> positive;  // N+, sorted
    std::vector<int> negative;  // N-, sorted
};

// Builds a connected graph with self-loops. edge_prob is only used by the
// erdos_renyi model, which resamples with an incremented sub-seed until the
// graph is connected (at most 1000 attempts); the attempt count is returned
// through er_retries when non-null.
Adjacency build_graph(int num_agents, GraphModel model, double edge_prob, uint64_t seed,
                      int* er_retries = nullptr);

// Metropolis-Hastings weights: a_mk = 1/max(|N_m|,|N_k|) on non-self edges,
// diagonal chosen so each column sums to one. Degrees count the self-loop.
CombinationMatrix metropolis_weights(const Adjacency& adj);

// Randomly permutes N_k \ {k} with the seeded stream and assigns even
// permutation positions to N+ and odd ones to N-; sizes differ by at most 1.
NeighborhoodSplit split_neighborhood(int k, const Adjacency& adj, uint64_t seed);

// One "src dst" pair per line, 1-indexed, each undirected edge once.
void write_edge_list(const Adjacency& adj, std::ostream& out);

}  // namespace lgh
