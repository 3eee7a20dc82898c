#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lgh/noise_protocol.hpp"
#include "lgh/rng.hpp"
#include "lgh/topology.hpp"
#include "lgh/transport.hpp"

namespace lgh {

enum class PrivacyMode { non_private, naive_laplace, local_graph_homomorphic };

const char* to_string(PrivacyMode mode);
// Accepts the long names plus the short aliases "naive" and "lgh".
PrivacyMode parse_privacy_mode(const std::string& name);

struct Sample {
    std::vector<double> u;
    double d = 0.0;
};

struct AgentDataset {
    std::vector<Sample> samples;
};

// Regularized quadratic loss ||d - u^T w||^2 + rho_reg ||w||^2.
struct LossSpec {
    enum class Kind { regularized_quadratic };
    Kind kind = Kind::regularized_quadratic;
    double rho_reg = 0.01;
};

// Per-sample gradient -2 u (d - u^T w) + 2 rho_reg w.
std::vector<double> gradient(const std::vector<double>& w, const Sample& sample, double rho_reg);

// psi = w - mu * grad.
std::vector<double> adapt(const std::vector<double>& w, const std::vector<double>& grad,
                          double mu);

// Weighted combination of the received (possibly masked) models; `received`
// must cover exactly N_k, with the self entry carrying agent k's own psi.
std::vector<double> combine(int k, const std::map<int, std::vector<double>>& received,
                            const CombinationMatrix& a);

struct AgentState {
    std::vector<double> w;
    const AgentDataset* data = nullptr;
    Rng gradient_rng;
};

struct UnprotectedEdgeWarning {
    int hub = -1;
    int iteration = 0;
};

struct DiffusionConfig {
    int iterations = 1000;
    double mu = 0.4;
    LossSpec loss;
    int batch_size = 1;
    NoiseParams noise;
    uint64_t gradient_seed = 1;
    uint64_t noise_seed = 2;
    bool freeze_split = false;      // reuse the first iteration's splits
    bool store_payloads = false;    // keep message payload copies in the log
    double divergence_threshold = 1e12;
};

struct DiffusionResult {
    // history[i][k] is agent k's iterate after iteration i; history[0] is
    // the common zero start.
    std::vector<std::vector<std::vector<double>>> history;
    TransportLog log;
    std::vector<UnprotectedEdgeWarning> warnings;
};

// Synchronous adapt-then-combine diffusion: every agent takes a stochastic
// gradient step on a uniformly sampled mini-batch, masks its messages
// according to `mode`, and combines what it receives. Gradient sampling and
// noise generation use separate seeded streams. Throws DivergedError when an
// iterate exceeds the divergence threshold.
DiffusionResult run_diffusion(const DiffusionConfig& cfg, const Adjacency& adj,
                              const CombinationMatrix& a,
                              const std::vector<AgentDataset>& datasets, PrivacyMode mode);

// Full-precision CSV of a run's history: "i,k,coord,value" with agents
// 1-indexed and i = 0 the common start.
void export_history(const std::vector<std::vector<std::vector<double>>>& history,
                    std::ostream& out);

}  // namespace lgh
