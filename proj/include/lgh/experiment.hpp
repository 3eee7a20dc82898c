#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lgh/diffusion.hpp"
#include "lgh/topology.hpp"

namespace lgh {

struct ExperimentConfig {
    int num_agents = 30;
    int dim = 2;
    int samples_per_agent = 100;
    GraphModel graph_model = GraphModel::erdos_renyi;
    double graph_p = 0.2;
    uint64_t graph_seed = 1;
    double mu = 0.4;
    double sigma_g2 = 0.01;
    double rho_reg = 0.01;
    int iterations = 1000;
    int trials = 20;
    int batch_size = 1;
    uint64_t seed = 42;
    std::vector<PrivacyMode> modes = {PrivacyMode::non_private, PrivacyMode::naive_laplace,
                                      PrivacyMode::local_graph_homomorphic};
    uint64_t c = 65536;
    bool freeze_split = false;
    bool fixed_data = false;          // reuse trial 0's data for every trial
    double laplace_scale = 0.0;       // nonzero overrides sigma_g/sqrt(2)

    void validate() const;  // throws ConfigError
};

// Flat "key = value" format, '#' starts a comment; unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);

// Generative model of the synthetic regression data.
struct SyntheticDataSpec {
    std::vector<double> w_star;    // dim
    std::vector<double> r_u;       // dim x dim feature covariance, row-major
    std::vector<double> sigma_v2;  // per-agent observation noise variance
};

// w* ~ N(0,I), R_u = I, sigma_v2 ~ U[0.05, 0.15] per agent; drawn once from
// the given seed.
SyntheticDataSpec default_data_spec(int num_agents, int dim, uint64_t seed);

// u ~ N(0, R_u) via the symmetric square root of R_u, d = u^T w* + v with
// v ~ N(0, sigma_v2[k]). Throws ConfigError if R_u is not positive definite.
std::vector<AgentDataset> generate_data(const SyntheticDataSpec& spec, int num_agents,
                                        int samples_per_agent, uint64_t seed);

// Minimizer of the pooled regularized least-squares objective,
// (R_u_hat + rho I)^{-1} (R_u_hat w* + r_uv_hat) over all agents' samples.
std::vector<double> closed_form_optimum(const std::vector<AgentDataset>& datasets,
                                        double rho_reg, const std::vector<double>& w_star);

// Analytic gradient of the pooled objective at w (oracle for the optimum).
std::vector<double> full_batch_gradient(const std::vector<AgentDataset>& datasets,
                                        const std::vector<double>& w, double rho_reg);

struct MetricsTrace {
    std::vector<double> msd_centroid;  // ||w_c,i - w^o||^2, i = 1..T
    std::vector<double> msd_avg;       // mean_k ||w_k,i - w^o||^2
};

MetricsTrace msd_metrics(const std::vector<std::vector<std::vector<double>>>& history,
                         const std::vector<double>& w_o);

struct ModeResult {
    PrivacyMode mode = PrivacyMode::non_private;
    std::vector<MetricsTrace> trials;
    MetricsTrace averaged;
    double steady_state_centroid = 0.0;  // mean over the last min(100, T) iterations
    double steady_state_avg = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ModeResult> modes;
    size_t transport_violations = 0;
    size_t unprotected_warnings = 0;
};

// Seed and diffusion settings of one trial, shared by every mode so that
// paired comparisons see identical gradients and data.
uint64_t trial_data_seed(const ExperimentConfig& cfg, int trial);
DiffusionConfig trial_diffusion_config(const ExperimentConfig& cfg, int trial);

// Runs `trials` independent simulations per mode (trial seeds base+t, fresh
// data per trial unless fixed_data) and averages the MSD traces pointwise.
ExperimentResult run_trials(const ExperimentConfig& cfg);

// CSV schema: mode,trial_or_avg,i,msd_centroid,msd_avg with full precision.
void export_csv(const ExperimentResult& result, std::ostream& out);
// Log-scale MSD chart, one polyline per mode plus a legend.
void export_svg(const ExperimentResult& result, std::ostream& out);
void write_summary(const ExperimentResult& result, std::ostream& out);

enum class ExportFormat { csv, svg };
// Writes to `path`; throws IoError when the file cannot be created.
void export_results(const ExperimentResult& result, ExportFormat format,
                    const std::string& path);

}  // namespace lgh
