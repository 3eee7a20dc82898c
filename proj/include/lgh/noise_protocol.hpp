#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lgh/rng.hpp"
#include "lgh/topology.hpp"
#include "lgh/transport.hpp"

namespace lgh {

enum class SplitRole { positive_side_uniform, negative_side_gamma };

struct SecretKeys {
    double v = 0.0;
    double v_prime = 0.0;
    SplitRole role = SplitRole::positive_side_uniform;
};

// P = e^(-v), P' = e^(-v'); in (0,1) whenever the secrets are positive.
struct PublicKeys {
    double p = 0.0;
    double p_prime = 0.0;
};

struct SharedKeys {
    double u = 0.0;
    double u_prime = 0.0;
};

struct NoiseParams {
    double sigma_g = 0.1;       // target noise standard deviation
    uint64_t c = 65536;         // uniformization multiplier
    double scale_override = 0;  // nonzero replaces the default Laplace scale

    // Laplace scale; the default sigma_g/sqrt(2) gives variance sigma_g^2.
    double laplace_scale() const {
        return scale_override > 0.0 ? scale_override : sigma_g / std::sqrt(2.0);
    }
};

// positive_side: two U((0,1]) draws; negative_side: two Gamma(2,1) draws.
SecretKeys sample_secrets(SplitRole role, Rng& rng);

PublicKeys public_key(const SecretKeys& sk);

// Fractional part of c*raw, the uniformization step applied to the shared
// value; exactly U(0,1) for integer c when raw is U(0,1).
double uniformize(double raw, uint64_t c);

// Shared key u = frac(c * e^(-v_l*v_m)) in [0,1). The caller's secret is
// round-tripped through the public-key map before the exponent product, so
// both ends of a pair multiply the same two doubles and derive the same u
// bit-for-bit. Throws ProtocolError unless other_public is inside (0,1).
double derive_shared_uniform(double my_secret, double other_public, uint64_t c);

// g = scale * ln(u/u'), Laplace(0, scale) for independent uniform inputs.
// Throws ProtocolError when u or u' is zero (degenerate key; the caller
// reruns that exchange).
double laplace_from_keys(double u, double u_prime, double scale);

// Noise generated jointly by one (l, m) pair for hub k; the vector holds one
// Laplace value per model coordinate and is identical in both agents' views.
struct PairNoiseRecord {
    int positive_agent = -1;
    int negative_agent = -1;
    int hub = -1;
    int iteration = 0;
    std::vector<double> noise;
};

struct PairNoiseBatch {
    std::vector<PairNoiseRecord> records;
    // True when one split side is empty, so the neighborhood's lone edge
    // goes out unmasked.
    bool unprotected = false;
};

// Runs the full key exchange (4 public-key messages relayed through the hub
// per pair, all coordinates batched per message) and the Laplace
// construction for every pair in N+ x N-. Secrets are drawn from each
// party's own stream in agent_rngs.
PairNoiseBatch generate_pair_noises(const NeighborhoodSplit& split, const NoiseParams& params,
                                    int dim, int iteration, TransportLog& transport,
                                    const Adjacency& adj, std::vector<Rng>& agent_rngs);

// Additive mask applied by `sender` to the model it sends to `hub`.
struct EdgeMask {
    int sender = -1;
    int hub = -1;
    int iteration = 0;
    std::vector<double> mask;
};

// Positive-side senders add the sum of their pair noises scaled by
// 1/a_{sender,hub}; negative-side senders subtract theirs. Returns an empty
// list when either split side is empty; throws ProtocolError on a missing
// pair record.
std::vector<EdgeMask> assemble_edge_masks(const std::vector<PairNoiseRecord>& records,
                                          const NeighborhoodSplit& split,
                                          const CombinationMatrix& a);

// Max-norm of sum_s a_{s,hub} * mask_s over the given masks (0 when empty).
double verify_local_cancellation(const std::vector<EdgeMask>& masks, const CombinationMatrix& a);

}  // namespace lgh
