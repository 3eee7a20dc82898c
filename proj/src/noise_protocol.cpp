#include "lgh/noise_protocol.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "lgh/errors.hpp"

namespace lgh {

SecretKeys sample_secrets(SplitRole role, Rng& rng) {
    SecretKeys sk;
    sk.role = role;
    if (role == SplitRole::positive_side_uniform) {
        sk.v = rng.uniform01();
        sk.v_prime = rng.uniform01();
    } else {
        sk.v = rng.gamma2();
        sk.v_prime = rng.gamma2();
    }
    return sk;
}

PublicKeys public_key(const SecretKeys& sk) {
    return {std::exp(-sk.v), std::exp(-sk.v_prime)};
}

double uniformize(double raw, uint64_t c) {
    const double scaled = static_cast<double>(c) * raw;
    return scaled - std::floor(scaled);
}

double derive_shared_uniform(double my_secret, double other_public, uint64_t c) {
    if (!(other_public > 0.0 && other_public < 1.0))
        throw ProtocolError("derive_shared_uniform: public key outside (0,1)");
    if (c < 1) throw ProtocolError("derive_shared_uniform: c must be a positive integer");
    // Round-tripping the own secret through the key map makes both sides of
    // the exchange multiply the identical pair of doubles; multiplication
    // commutes, so the shared key matches bit-for-bit.
    const double mine = -std::log(std::exp(-my_secret));
    const double other = -std::log(other_public);
    const double raw = std::exp(-(mine * other));
    return uniformize(raw, c);
}

double laplace_from_keys(double u, double u_prime, double scale) {
    if (!(scale > 0.0)) throw ProtocolError("laplace_from_keys: scale must be positive");
    if (u <= 0.0 || u_prime <= 0.0)
        throw ProtocolError("laplace_from_keys: degenerate shared key (u == 0)");
    return scale * std::log(u / u_prime);
}

namespace {

bool valid_public(const PublicKeys& pk) {
    return pk.p > 0.0 && pk.p < 1.0 && pk.p_prime > 0.0 && pk.p_prime < 1.0;
}

}  // namespace

PairNoiseBatch generate_pair_noises(const NeighborhoodSplit& split, const NoiseParams& params,
                                    int dim, int iteration, TransportLog& transport,
                                    const Adjacency& adj, std::vector<Rng>& agent_rngs) {
    PairNoiseBatch batch;
    if (split.positive.empty() || split.negative.empty()) {
        batch.unprotected = true;
        return batch;
    }
    const double scale = params.laplace_scale();
    batch.records.reserve(split.positive.size() * split.negative.size());

    for (int l : split.positive) {
        for (int m : split.negative) {
            std::vector<double> keys_l, keys_m;
            keys_l.reserve(2 * static_cast<size_t>(dim));
            keys_m.reserve(2 * static_cast<size_t>(dim));
            PairNoiseRecord rec;
            rec.positive_agent = l;
            rec.negative_agent = m;
            rec.hub = split.agent;
            rec.iteration = iteration;
            rec.noise.resize(dim);

            for (int coord = 0; coord < dim; ++coord) {
                for (;;) {
                    const SecretKeys sl =
                        sample_secrets(SplitRole::positive_side_uniform, agent_rngs[l]);
                    const SecretKeys sm =
                        sample_secrets(SplitRole::negative_side_gamma, agent_rngs[m]);
                    const PublicKeys pl = public_key(sl);
                    const PublicKeys pm = public_key(sm);
                    if (!valid_public(pl) || !valid_public(pm)) continue;

                    // Both parties derive; equality is structural, the check
                    // guards the protocol's core invariant.
                    const SharedKeys at_l{derive_shared_uniform(sl.v, pm.p, params.c),
                                          derive_shared_uniform(sl.v_prime, pm.p_prime, params.c)};
                    const SharedKeys at_m{derive_shared_uniform(sm.v, pl.p, params.c),
                                          derive_shared_uniform(sm.v_prime, pl.p_prime, params.c)};
                    if (at_l.u != at_m.u || at_l.u_prime != at_m.u_prime)
                        throw ProtocolError("generate_pair_noises: shared keys disagree");
                    if (at_l.u == 0.0 || at_l.u_prime == 0.0) continue;  // rerun this exchange

                    keys_l.push_back(pl.p);
                    keys_l.push_back(pl.p_prime);
                    keys_m.push_back(pm.p);
                    keys_m.push_back(pm.p_prime);
                    rec.noise[coord] = laplace_from_keys(at_l.u, at_l.u_prime, scale);
                    break;
                }
            }
            transport.relay_pair_exchange(split.agent, l, m, iteration, keys_l, keys_m, adj);
            batch.records.push_back(std::move(rec));
        }
    }
    return batch;
}

std::vector<EdgeMask> assemble_edge_masks(const std::vector<PairNoiseRecord>& records,
                                          const NeighborhoodSplit& split,
                                          const CombinationMatrix& a) {
    std::vector<EdgeMask> masks;
    if (split.positive.empty() || split.negative.empty()) return masks;
    if (records.empty()) throw ProtocolError("assemble_edge_masks: no pair records");

    const int hub = split.agent;
    const int dim = static_cast<int>(records.front().noise.size());
    const int iteration = records.front().iteration;

    std::map<std::pair<int, int>, const PairNoiseRecord*> by_pair;
    for (const auto& rec : records) by_pair[{rec.positive_agent, rec.negative_agent}] = &rec;

    auto weight = [&](int sender) {
        const double w = a(sender, hub);
        if (!(w > 0.0))
            throw ProtocolError("assemble_edge_masks: nonpositive weight for sender " +
                                std::to_string(sender));
        return w;
    };

    for (int l : split.positive) {
        EdgeMask em;
        em.sender = l;
        em.hub = hub;
        em.iteration = iteration;
        em.mask.assign(dim, 0.0);
        for (int m : split.negative) {
            const auto it = by_pair.find({l, m});
            if (it == by_pair.end())
                throw ProtocolError("assemble_edge_masks: missing record for a pair");
            for (int coord = 0; coord < dim; ++coord) em.mask[coord] += it->second->noise[coord];
        }
        const double w = weight(l);
        for (double& x : em.mask) x /= w;
        masks.push_back(std::move(em));
    }
    for (int m : split.negative) {
        EdgeMask em;
        em.sender = m;
        em.hub = hub;
        em.iteration = iteration;
        em.mask.assign(dim, 0.0);
        for (int l : split.positive) {
            const auto it = by_pair.find({l, m});
            if (it == by_pair.end())
                throw ProtocolError("assemble_edge_masks: missing record for a pair");
            for (int coord = 0; coord < dim; ++coord) em.mask[coord] -= it->second->noise[coord];
        }
        const double w = weight(m);
        for (double& x : em.mask) x /= w;
        masks.push_back(std::move(em));
    }
    return masks;
}

double verify_local_cancellation(const std::vector<EdgeMask>& masks, const CombinationMatrix& a) {
    if (masks.empty()) return 0.0;
    const size_t dim = masks.front().mask.size();
    std::vector<double> total(dim, 0.0);
    for (const auto& em : masks) {
        const double w = a(em.sender, em.hub);
        for (size_t coord = 0; coord < dim; ++coord) total[coord] += w * em.mask[coord];
    }
    double residual = 0.0;
    for (double x : total) residual = std::max(residual, std::abs(x));
    return residual;
}

}  // namespace lgh
