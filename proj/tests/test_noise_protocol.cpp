#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lgh/errors.hpp"
#include "lgh/noise_protocol.hpp"
#include "lgh/privacy_metrics.hpp"
#include "lgh/rng.hpp"
#include "lgh/topology.hpp"
#include "lgh/transport.hpp"

using namespace lgh;

namespace {

std::vector<Rng> agent_streams(int n, uint64_t seed) {
    std::vector<Rng> rngs;
    for (int k = 0; k < n; ++k)
        rngs.emplace_back(derive_seed(seed, seed_tag::noise, static_cast<uint64_t>(k)));
    return rngs;
}

}  // namespace

TEST_CASE("secret keys follow their role distributions") {
    Rng rng(101);
    const int n = 100000;
    double mean_pos = 0.0, mean_neg = 0.0;
    for (int i = 0; i < n; ++i) {
        const SecretKeys sp = sample_secrets(SplitRole::positive_side_uniform, rng);
        const SecretKeys sn = sample_secrets(SplitRole::negative_side_gamma, rng);
        CHECK(sp.role == SplitRole::positive_side_uniform);
        CHECK(sn.role == SplitRole::negative_side_gamma);
        CHECK(sp.v >= 0.0);
        CHECK(sp.v <= 1.0);
        CHECK(sn.v > 0.0);
        mean_pos += sp.v;
        mean_neg += sn.v;
    }
    mean_pos /= n;
    mean_neg /= n;
    CHECK(mean_pos > 0.495);
    CHECK(mean_pos < 0.505);  // U(0,1) mean 1/2
    CHECK(mean_neg > 1.97);
    CHECK(mean_neg < 2.03);  // Gamma(2,1) mean 2
}

TEST_CASE("public keys are e^(-v)") {
    CHECK(public_key({0.0, 0.0, SplitRole::positive_side_uniform}).p == 1.0);
    CHECK(public_key({1.0, 1.0, SplitRole::positive_side_uniform}).p ==
          doctest::Approx(0.367879441).epsilon(1e-9));
    CHECK(public_key({2.0, 2.0, SplitRole::negative_side_gamma}).p ==
          doctest::Approx(0.135335283).epsilon(1e-9));
}

TEST_CASE("derive_shared_uniform reproduces the raw value for c = 1") {
    // raw = e^(-ln 2) = 0.5 built from my_secret = 1, other_public = 0.5.
    CHECK(derive_shared_uniform(1.0, 0.5, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("uniformization folds integer landings to zero") {
    CHECK(uniformize(0.75, 4) == 0.0);
    CHECK(uniformize(0.5, 1) == 0.5);
    CHECK(uniformize(0.625, 2) == 0.25);
}

TEST_CASE("derive_shared_uniform rejects keys outside (0,1)") {
    CHECK_THROWS_AS(derive_shared_uniform(0.5, 0.0, 1), ProtocolError);
    CHECK_THROWS_AS(derive_shared_uniform(0.5, 1.0, 1), ProtocolError);
    CHECK_THROWS_AS(derive_shared_uniform(0.5, 1.5, 1), ProtocolError);
}

TEST_CASE("both parties derive bit-identical shared keys") {
    Rng pos(7), neg(8);
    for (int trial = 0; trial < 2000; ++trial) {
        const SecretKeys sl = sample_secrets(SplitRole::positive_side_uniform, pos);
        const SecretKeys sm = sample_secrets(SplitRole::negative_side_gamma, neg);
        const PublicKeys pl = public_key(sl);
        const PublicKeys pm = public_key(sm);
        for (const uint64_t c : {uint64_t{1}, uint64_t{65536}, uint64_t{12345}}) {
            CHECK(derive_shared_uniform(sl.v, pm.p, c) == derive_shared_uniform(sm.v, pl.p, c));
            CHECK(derive_shared_uniform(sl.v_prime, pm.p_prime, c) ==
                  derive_shared_uniform(sm.v_prime, pl.p_prime, c));
        }
    }
}

TEST_CASE("shared keys pass a KS test against the uniform law") {
    Rng pos(170), neg(230);
    const size_t n = 100000;
    std::vector<double> keys;
    keys.reserve(n);
    while (keys.size() < n) {
        const SecretKeys sl = sample_secrets(SplitRole::positive_side_uniform, pos);
        const SecretKeys sm = sample_secrets(SplitRole::negative_side_gamma, neg);
        const PublicKeys pm = public_key(sm);
        if (!(pm.p > 0 && pm.p < 1)) continue;
        const double u = derive_shared_uniform(sl.v, pm.p, 65536);
        if (u == 0.0) continue;
        keys.push_back(u);
    }
    CHECK(ks_statistic(keys, cdf_uniform01) < ks_critical(n));  // 1.358/sqrt(n)
}

TEST_CASE("laplace_from_keys basics") {
    CHECK(laplace_from_keys(0.37, 0.37, 1.0) == 0.0);
    CHECK(laplace_from_keys(std::exp(-1.0) * 0.4, 0.4, 1.0) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_THROWS_AS(laplace_from_keys(0.0, 0.5, 1.0), ProtocolError);
    CHECK_THROWS_AS(laplace_from_keys(0.5, 0.0, 1.0), ProtocolError);
    CHECK_THROWS_AS(laplace_from_keys(0.5, 0.5, 0.0), ProtocolError);
}

TEST_CASE("laplace noise has the target variance and law") {
    const double sigma_g2 = 0.01;
    const double scale = std::sqrt(sigma_g2) / std::sqrt(2.0);
    Rng rng(31);
    const size_t n = 100000;
    std::vector<double> noise(n);
    double mean = 0.0;
    for (auto& g : noise) {
        g = laplace_from_keys(rng.uniform01(), rng.uniform01(), scale);
        mean += g;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double g : noise) var += (g - mean) * (g - mean);
    var /= static_cast<double>(n);
    CHECK(var > 0.0095);
    CHECK(var < 0.0105);
    CHECK(ks_statistic(noise, [&](double x) { return cdf_laplace(x, scale); }) < ks_critical(n));
}

TEST_CASE("pair noise generation counts pairs times coordinates") {
    const Adjacency adj = build_graph(6, GraphModel::complete, 0.0, 0);
    const CombinationMatrix a = metropolis_weights(adj);
    NeighborhoodSplit split;
    split.agent = 0;
    split.positive = {1, 2};
    split.negative = {3, 4, 5};
    auto rngs = agent_streams(6, 40);
    TransportLog log;
    const PairNoiseBatch batch = generate_pair_noises(split, NoiseParams{}, 2, 1, log, adj, rngs);
    CHECK_FALSE(batch.unprotected);
    REQUIRE(batch.records.size() == 6);
    for (const auto& rec : batch.records) {
        CHECK(rec.noise.size() == 2);
        CHECK(rec.hub == 0);
        for (double g : rec.noise) CHECK(std::isfinite(g));
    }
    CHECK(log.count(MessageKind::public_key) == 4 * 6);
    const auto masks = assemble_edge_masks(batch.records, split, a);
    CHECK(masks.size() == 5);
}

TEST_CASE("a one-sided split is flagged unprotected") {
    const Adjacency adj = build_graph(3, GraphModel::ring, 0.0, 0);
    NeighborhoodSplit split;
    split.agent = 0;
    split.positive = {1};
    auto rngs = agent_streams(3, 4);
    TransportLog log;
    const PairNoiseBatch batch = generate_pair_noises(split, NoiseParams{}, 3, 1, log, adj, rngs);
    CHECK(batch.unprotected);
    CHECK(batch.records.empty());
    CHECK(log.messages().empty());
    CHECK(assemble_edge_masks(batch.records, split, metropolis_weights(adj)).empty());
}

TEST_CASE("pair noise generation is deterministic in the seeds") {
    const Adjacency adj = build_graph(5, GraphModel::complete, 0.0, 0);
    NeighborhoodSplit split;
    split.agent = 0;
    split.positive = {1, 3};
    split.negative = {2, 4};
    for (int run = 0; run < 2; ++run) {
        auto rngs_a = agent_streams(5, 99);
        auto rngs_b = agent_streams(5, 99);
        TransportLog log_a, log_b;
        const auto batch_a = generate_pair_noises(split, NoiseParams{}, 4, 1, log_a, adj, rngs_a);
        const auto batch_b = generate_pair_noises(split, NoiseParams{}, 4, 1, log_b, adj, rngs_b);
        REQUIRE(batch_a.records.size() == batch_b.records.size());
        for (size_t r = 0; r < batch_a.records.size(); ++r)
            CHECK(batch_a.records[r].noise == batch_b.records[r].noise);
    }
}

TEST_CASE("single-pair masks scale by the inverse weight and cancel") {
    const Adjacency adj = build_graph(3, GraphModel::complete, 0.0, 0);
    CombinationMatrix a;
    a.num_agents = 3;
    a.entries = {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3};
    NeighborhoodSplit split;
    split.agent = 0;
    split.positive = {1};
    split.negative = {2};
    PairNoiseRecord rec;
    rec.positive_agent = 1;
    rec.negative_agent = 2;
    rec.hub = 0;
    rec.iteration = 1;
    rec.noise = {0.6};
    const auto masks = assemble_edge_masks({rec}, split, a);
    REQUIRE(masks.size() == 2);
    CHECK(masks[0].sender == 1);
    CHECK(masks[0].mask[0] == doctest::Approx(1.8).epsilon(1e-14));
    CHECK(masks[1].sender == 2);
    CHECK(masks[1].mask[0] == doctest::Approx(-1.8).epsilon(1e-14));
    CHECK(a(1, 0) * masks[0].mask[0] + a(2, 0) * masks[1].mask[0] == 0.0);
}

TEST_CASE("assembled masks cancel inside a random neighborhood") {
    const Adjacency adj = build_graph(6, GraphModel::complete, 0.0, 0);
    const CombinationMatrix a = metropolis_weights(adj);
    const NeighborhoodSplit split = split_neighborhood(0, adj, 77);
    auto rngs = agent_streams(6, 13);
    TransportLog log;
    const auto batch = generate_pair_noises(split, NoiseParams{}, 3, 1, log, adj, rngs);
    const auto masks = assemble_edge_masks(batch.records, split, a);
    REQUIRE(masks.size() == 5);

    double max_mag = 0.0;
    for (const auto& em : masks)
        for (double x : em.mask) max_mag = std::max(max_mag, std::abs(x));
    CHECK(verify_local_cancellation(masks, a) <= 1e-9 * max_mag);
}

TEST_CASE("missing pair records are a protocol error") {
    const Adjacency adj = build_graph(4, GraphModel::complete, 0.0, 0);
    const CombinationMatrix a = metropolis_weights(adj);
    NeighborhoodSplit split;
    split.agent = 0;
    split.positive = {1, 2};
    split.negative = {3};
    PairNoiseRecord rec;
    rec.positive_agent = 1;
    rec.negative_agent = 3;
    rec.hub = 0;
    rec.noise = {0.1};
    CHECK_THROWS_AS(assemble_edge_masks({rec}, split, a), ProtocolError);
    CHECK_THROWS_AS(assemble_edge_masks({}, split, a), ProtocolError);
}

TEST_CASE("independent per-edge noise does not cancel") {
    const Adjacency adj = build_graph(6, GraphModel::complete, 0.0, 0);
    const CombinationMatrix a = metropolis_weights(adj);
    const double scale = 0.1 / std::sqrt(2.0);
    int exceeded = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<EdgeMask> masks;
        double max_mag = 0.0;
        for (int sender = 1; sender < 6; ++sender) {
            EdgeMask em;
            em.sender = sender;
            em.hub = 0;
            em.mask = {laplace_from_keys(rng.uniform01(), rng.uniform01(), scale)};
            max_mag = std::max(max_mag, std::abs(em.mask[0]));
            masks.push_back(std::move(em));
        }
        if (verify_local_cancellation(masks, a) > 1e-9 * max_mag) ++exceeded;
    }
    CHECK(exceeded >= 99);
}

TEST_CASE("verify_local_cancellation of nothing is zero") {
    CombinationMatrix a;
    CHECK(verify_local_cancellation({}, a) == 0.0);
}
