#include "lgh/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "lgh/errors.hpp"

namespace lgh {

const char* to_string(PrivacyMode mode) {
    switch (mode) {
        case PrivacyMode::non_private: return "non_private";
        case PrivacyMode::naive_laplace: return "naive_laplace";
        case PrivacyMode::local_graph_homomorphic: return "local_graph_homomorphic";
    }
    return "?";
}

PrivacyMode parse_privacy_mode(const std::string& name) {
    if (name == "non_private" || name == "np") return PrivacyMode::non_private;
    if (name == "naive_laplace" || name == "naive") return PrivacyMode::naive_laplace;
    if (name == "local_graph_homomorphic" || name == "lgh")
        return PrivacyMode::local_graph_homomorphic;
    throw ConfigError("unknown privacy mode: " + name);
}

std::vector<double> gradient(const std::vector<double>& w, const Sample& sample, double rho_reg) {
    if (w.size() != sample.u.size())
        throw ConfigError("gradient: dimension mismatch between w and the sample");
    double residual = sample.d;
    for (size_t j = 0; j < w.size(); ++j) residual -= sample.u[j] * w[j];
    std::vector<double> g(w.size());
    for (size_t j = 0; j < w.size(); ++j)
        g[j] = -2.0 * sample.u[j] * residual + 2.0 * rho_reg * w[j];
    return g;
}

std::vector<double> adapt(const std::vector<double>& w, const std::vector<double>& grad,
                          double mu) {
    if (!(mu > 0.0)) throw ConfigError("adapt: step size must be positive");
    if (w.size() != grad.size()) throw ConfigError("adapt: dimension mismatch");
    std::vector<double> psi(w.size());
    for (size_t j = 0; j < w.size(); ++j) psi[j] = w[j] - mu * grad[j];
    return psi;
}

std::vector<double> combine(int k, const std::map<int, std::vector<double>>& received,
                            const CombinationMatrix& a) {
    if (received.empty()) throw ProtocolError("combine: nothing received");
    const size_t dim = received.begin()->second.size();
    std::vector<double> w(dim, 0.0);
    size_t expected = 0;
    for (int m = 0; m < a.num_agents; ++m) {
        if (a(m, k) == 0.0) continue;
        ++expected;
        const auto it = received.find(m);
        if (it == received.end())
            throw ProtocolError("combine: missing message from sender " + std::to_string(m));
        const double weight = a(m, k);
        for (size_t j = 0; j < dim; ++j) w[j] += weight * it->second[j];
    }
    if (expected != received.size())
        throw ProtocolError("combine: received messages from outside the neighborhood");
    return w;
}

namespace {

std::vector<double> batch_gradient(const std::vector<double>& w, const AgentDataset& data,
                                   int batch_size, double rho_reg, Rng& rng) {
    std::vector<double> g(w.size(), 0.0);
    for (int b = 0; b < batch_size; ++b) {
        const size_t idx = rng.uniform_below(data.samples.size());
        const std::vector<double> gs = gradient(w, data.samples[idx], rho_reg);
        for (size_t j = 0; j < g.size(); ++j) g[j] += gs[j];
    }
    for (double& x : g) x /= batch_size;
    return g;
}

void check_finite(const std::vector<double>& w, double threshold, int iteration, int agent) {
    for (double x : w)
        if (!std::isfinite(x) || std::abs(x) > threshold) throw DivergedError(iteration, agent);
}

}  // namespace

DiffusionResult run_diffusion(const DiffusionConfig& cfg, const Adjacency& adj,
                              const CombinationMatrix& a,
                              const std::vector<AgentDataset>& datasets, PrivacyMode mode) {
    const int n_agents = adj.num_agents;
    if (static_cast<int>(datasets.size()) != n_agents)
        throw ConfigError("run_diffusion: one dataset per agent required");
    if (cfg.iterations < 0) throw ConfigError("run_diffusion: negative iteration count");
    if (cfg.batch_size < 1) throw ConfigError("run_diffusion: batch_size must be >= 1");
    size_t dim = 0;
    for (const auto& ds : datasets) {
        if (ds.samples.empty()) throw ConfigError("run_diffusion: empty dataset");
        if (static_cast<int>(ds.samples.size()) < cfg.batch_size)
            throw ConfigError("run_diffusion: batch_size exceeds a dataset size");
        for (const auto& s : ds.samples) {
            if (dim == 0) dim = s.u.size();
            if (s.u.size() != dim) throw ConfigError("run_diffusion: inconsistent feature dim");
        }
    }

    DiffusionResult result;
    result.log = TransportLog(cfg.store_payloads);

    std::vector<AgentState> states;
    states.reserve(n_agents);
    std::vector<Rng> noise_rngs;
    noise_rngs.reserve(n_agents);
    for (int k = 0; k < n_agents; ++k) {
        states.push_back(AgentState{std::vector<double>(dim, 0.0), &datasets[k],
                                    Rng(derive_seed(cfg.gradient_seed, seed_tag::gradient,
                                                    static_cast<uint64_t>(k)))});
        noise_rngs.emplace_back(
            derive_seed(cfg.noise_seed, seed_tag::noise, static_cast<uint64_t>(k)));
    }

    result.history.reserve(cfg.iterations + 1);
    {
        std::vector<std::vector<double>> snapshot;
        snapshot.reserve(states.size());
        for (const auto& st : states) snapshot.push_back(st.w);
        result.history.push_back(std::move(snapshot));
    }

    std::vector<std::vector<double>> psi(n_agents);
    // received[k]: sender -> masked model, one map per combining agent.
    std::vector<std::map<int, std::vector<double>>> received(n_agents);

    for (int i = 1; i <= cfg.iterations; ++i) {
        for (int k = 0; k < n_agents; ++k) {
            auto& st = states[k];
            const auto grad =
                batch_gradient(st.w, *st.data, cfg.batch_size, cfg.loss.rho_reg, st.gradient_rng);
            psi[k] = adapt(st.w, grad, cfg.mu);
        }
        for (auto& r : received) r.clear();

        if (mode == PrivacyMode::local_graph_homomorphic) {
            for (int k = 0; k < n_agents; ++k) {
                const auto others = adj.non_self_neighbors(k);
                if (others.empty()) continue;
                const uint64_t split_iter = cfg.freeze_split ? 1u : static_cast<uint64_t>(i);
                const NeighborhoodSplit split = split_neighborhood(
                    k, adj, derive_seed(cfg.noise_seed, seed_tag::split, split_iter));

                // Announce the split: +1 for N+, -1 for N-, aligned with the
                // sorted non-self neighbor list.
                std::vector<double> split_payload;
                split_payload.reserve(others.size());
                for (int nb : others)
                    split_payload.push_back(
                        std::binary_search(split.positive.begin(), split.positive.end(), nb)
                            ? 1.0
                            : -1.0);
                for (int nb : others) {
                    Message msg;
                    msg.src = k;
                    msg.dst = nb;
                    msg.iteration = i;
                    msg.kind = MessageKind::split_announcement;
                    msg.payload = split_payload;
                    result.log.send(std::move(msg), adj);
                }

                PairNoiseBatch batch = generate_pair_noises(
                    split, cfg.noise, static_cast<int>(dim), i, result.log, adj, noise_rngs);
                if (batch.unprotected) result.warnings.push_back({k, i});
                const std::vector<EdgeMask> masks = assemble_edge_masks(batch.records, split, a);

                std::map<int, const EdgeMask*> mask_by_sender;
                for (const auto& em : masks) mask_by_sender[em.sender] = &em;
                for (int sender : others) {
                    std::vector<double> value = psi[sender];
                    if (const auto it = mask_by_sender.find(sender); it != mask_by_sender.end())
                        for (size_t j = 0; j < dim; ++j) value[j] += it->second->mask[j];
                    Message msg;
                    msg.src = sender;
                    msg.dst = k;
                    msg.iteration = i;
                    msg.kind = MessageKind::masked_model;
                    msg.payload = value;
                    result.log.send(std::move(msg), adj);
                    received[k].emplace(sender, std::move(value));
                }
            }
        } else {
            const double scale = cfg.noise.laplace_scale();
            for (int m = 0; m < n_agents; ++m) {
                for (int k : adj.non_self_neighbors(m)) {
                    std::vector<double> value = psi[m];
                    if (mode == PrivacyMode::naive_laplace)
                        for (size_t j = 0; j < dim; ++j)
                            value[j] += laplace_from_keys(noise_rngs[m].uniform01(),
                                                          noise_rngs[m].uniform01(), scale);
                    Message msg;
                    msg.src = m;
                    msg.dst = k;
                    msg.iteration = i;
                    msg.kind = MessageKind::masked_model;
                    msg.payload = value;
                    result.log.send(std::move(msg), adj);
                    received[k].emplace(m, std::move(value));
                }
            }
        }

        for (int k = 0; k < n_agents; ++k) {
            received[k].emplace(k, psi[k]);  // self-channel is never masked
            states[k].w = combine(k, received[k], a);
            check_finite(states[k].w, cfg.divergence_threshold, i, k);
        }
        std::vector<std::vector<double>> snapshot;
        snapshot.reserve(n_agents);
        for (const auto& st : states) snapshot.push_back(st.w);
        result.history.push_back(std::move(snapshot));
    }
    return result;
}

void export_history(const std::vector<std::vector<std::vector<double>>>& history,
                    std::ostream& out) {
    out << "i,k,coord,value\n";
    char buf[40];
    for (size_t i = 0; i < history.size(); ++i)
        for (size_t k = 0; k < history[i].size(); ++k)
            for (size_t coord = 0; coord < history[i][k].size(); ++coord) {
                std::snprintf(buf, sizeof buf, "%.17g", history[i][k][coord]);
                out << i << ',' << (k + 1) << ',' << coord << ',' << buf << '\n';
            }
}

}  // namespace lgh
