#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lgh/errors.hpp"
#include "lgh/topology.hpp"

using namespace lgh;

namespace {

// Independent connectivity oracle: plain BFS over non-self edges.
int bfs_reachable(const Adjacency& adj) {
    std::vector<char> seen(adj.num_agents, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj.neighbor_sets[v]) {
            if (w != v && !seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached;
}

Adjacency path3() {
    Adjacency adj;
    adj.num_agents = 3;
    adj.neighbor_sets = {{0, 1}, {0, 1, 2}, {1, 2}};
    return adj;
}

}  // namespace

TEST_CASE("ring of 3 is the triangle") {
    const Adjacency adj = build_graph(3, GraphModel::ring, 0.0, 0);
    for (int k = 0; k < 3; ++k) CHECK(adj.neighbor_sets[k] == std::vector<int>{0, 1, 2});
}

TEST_CASE("complete graph with 2 agents") {
    const Adjacency adj = build_graph(2, GraphModel::complete, 0.0, 123);
    CHECK(adj.neighbor_sets[0] == std::vector<int>{0, 1});
    CHECK(adj.neighbor_sets[1] == std::vector<int>{0, 1});
}

TEST_CASE("erdos-renyi graphs come out connected") {
    const Adjacency adj = build_graph(30, GraphModel::erdos_renyi, 0.2, 7);
    CHECK(bfs_reachable(adj) == 30);
    CHECK_NOTHROW(validate_adjacency(adj));
}

TEST_CASE("erdos-renyi reports its retry count") {
    int retries = -1;
    // Sparse enough that some seeds need resampling before connectivity.
    const Adjacency adj = build_graph(40, GraphModel::erdos_renyi, 0.08, 3);
    build_graph(40, GraphModel::erdos_renyi, 0.08, 3, &retries);
    CHECK(bfs_reachable(adj) == 40);
    CHECK(retries >= 0);
}

TEST_CASE("build_graph is deterministic in its inputs") {
    for (auto model : {GraphModel::erdos_renyi, GraphModel::ring, GraphModel::star,
                       GraphModel::complete}) {
        const Adjacency a = build_graph(12, model, 0.3, 99);
        const Adjacency b = build_graph(12, model, 0.3, 99);
        CHECK(a.neighbor_sets == b.neighbor_sets);
    }
}

TEST_CASE("build_graph rejects bad inputs") {
    CHECK_THROWS_AS(build_graph(1, GraphModel::ring, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(build_graph(5, GraphModel::erdos_renyi, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(build_graph(5, GraphModel::erdos_renyi, 1.5, 0), ConfigError);
}

TEST_CASE("erdos-renyi gives up after exhausting its retry budget") {
    // With p this small a 50-agent graph has essentially no edges, so all
    // 1000 attempts stay disconnected.
    CHECK_THROWS_AS(build_graph(50, GraphModel::erdos_renyi, 1e-7, 0), ConfigError);
}

TEST_CASE("star graph connects everyone through the hub") {
    const Adjacency adj = build_graph(6, GraphModel::star, 0.0, 0);
    CHECK(adj.degree(0) == 6);
    for (int k = 1; k < 6; ++k) {
        CHECK(adj.degree(k) == 2);
        CHECK(adj.contains_edge(0, k));
    }
    CHECK(bfs_reachable(adj) == 6);
}

TEST_CASE("metropolis weights on the path 1-2-3") {
    const Adjacency adj = path3();
    const CombinationMatrix a = metropolis_weights(adj);
    // Hand-derived: a12 = a23 = 1/max(2,3) = 1/3, diagonals fill the columns.
    CHECK(a(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(a(1, 2) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(a(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(a(1, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(a(2, 2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(a(0, 2) == 0.0);
    CHECK_NOTHROW(validate_combination_matrix(a, adj));
}

TEST_CASE("metropolis weights on the 2-agent complete graph") {
    const Adjacency adj = build_graph(2, GraphModel::complete, 0.0, 0);
    const CombinationMatrix a = metropolis_weights(adj);
    CHECK(a(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("combination matrices are doubly stochastic with exact support") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        const int agents = 2 + static_cast<int>(seed % 7) * 5;
        const Adjacency adj = build_graph(agents, GraphModel::erdos_renyi, 0.3, seed);
        const CombinationMatrix a = metropolis_weights(adj);
        for (int m = 0; m < agents; ++m) {
            double row = 0.0, col = 0.0;
            for (int k = 0; k < agents; ++k) {
                CHECK(a(m, k) == a(k, m));  // symmetric bit-for-bit
                CHECK((a(m, k) > 0.0) == adj.contains_edge(m, k));
                row += a(m, k);
                col += a(k, m);
            }
            CHECK(std::abs(row - 1.0) <= 1e-12);
            CHECK(std::abs(col - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("split keeps a lone neighbor on the positive side") {
    const Adjacency adj = path3();
    const NeighborhoodSplit split = split_neighborhood(0, adj, 5);
    CHECK(split.positive == std::vector<int>{1});
    CHECK(split.negative.empty());
}

TEST_CASE("split balances four neighbors two against two") {
    const Adjacency adj = build_graph(5, GraphModel::complete, 0.0, 0);
    const NeighborhoodSplit split = split_neighborhood(2, adj, 11);
    CHECK(split.positive.size() == 2);
    CHECK(split.negative.size() == 2);
}

TEST_CASE("split of five neighbors is a seeded 3/2 partition") {
    const Adjacency adj = build_graph(6, GraphModel::complete, 0.0, 0);
    const NeighborhoodSplit s0 = split_neighborhood(0, adj, 0);
    const NeighborhoodSplit s1 = split_neighborhood(0, adj, 1);

    for (const auto& s : {s0, s1}) {
        CHECK(s.positive.size() == 3);
        CHECK(s.negative.size() == 2);
        std::set<int> all(s.positive.begin(), s.positive.end());
        for (int m : s.negative) CHECK(all.insert(m).second);  // disjoint
        CHECK(all == std::set<int>{1, 2, 3, 4, 5});            // union = N_k \ {k}
    }
    CHECK(s0.positive != s1.positive);  // different seeds, different partition
    CHECK(split_neighborhood(0, adj, 0).positive == s0.positive);  // deterministic
}

TEST_CASE("split balance holds across random neighborhoods") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const Adjacency adj = build_graph(15, GraphModel::erdos_renyi, 0.4, seed);
        for (int k = 0; k < adj.num_agents; ++k) {
            const auto others = adj.non_self_neighbors(k);
            if (others.empty()) continue;
            const NeighborhoodSplit s = split_neighborhood(k, adj, seed);
            CHECK(std::abs(static_cast<int>(s.positive.size()) -
                           static_cast<int>(s.negative.size())) <= 1);
            std::vector<int> merged = s.positive;
            merged.insert(merged.end(), s.negative.begin(), s.negative.end());
            std::sort(merged.begin(), merged.end());
            CHECK(merged == others);
        }
    }
}

TEST_CASE("splitting an isolated agent fails") {
    Adjacency adj;
    adj.num_agents = 2;
    adj.neighbor_sets = {{0}, {1}};
    CHECK_THROWS_AS(split_neighborhood(0, adj, 0), ProtocolError);
}

TEST_CASE("validate_adjacency rejects broken graphs") {
    Adjacency no_self;
    no_self.num_agents = 2;
    no_self.neighbor_sets = {{1}, {0, 1}};
    CHECK_THROWS_AS(validate_adjacency(no_self), ConfigError);

    Adjacency asymmetric;
    asymmetric.num_agents = 3;
    asymmetric.neighbor_sets = {{0, 1}, {1}, {2}};
    CHECK_THROWS_AS(validate_adjacency(asymmetric), ConfigError);

    Adjacency disconnected;
    disconnected.num_agents = 2;
    disconnected.neighbor_sets = {{0}, {1}};
    CHECK_THROWS_AS(validate_adjacency(disconnected), ConfigError);
}

TEST_CASE("edge list export is 1-indexed") {
    std::ostringstream out;
    write_edge_list(path3(), out);
    CHECK(out.str() == "1 2\n2 3\n");
}
