#include "lgh/experiment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lgh/errors.hpp"
#include "lgh/rng.hpp"

namespace lgh {

void ExperimentConfig::validate() const {
    if (num_agents < 1) throw ConfigError("config: agents must be >= 1");
    if (dim < 1) throw ConfigError("config: dim must be >= 1");
    if (samples_per_agent < 1) throw ConfigError("config: samples_per_agent must be >= 1");
    if (!(mu > 0.0)) throw ConfigError("config: mu must be positive");
    if (!(sigma_g2 > 0.0)) throw ConfigError("config: sigma_g2 must be positive");
    if (rho_reg < 0.0) throw ConfigError("config: rho_reg must be nonnegative");
    if (iterations < 1) throw ConfigError("config: iterations must be >= 1");
    if (trials < 1) throw ConfigError("config: trials must be >= 1");
    if (batch_size < 1 || batch_size > samples_per_agent)
        throw ConfigError("config: batch_size must be in [1, samples_per_agent]");
    if (modes.empty()) throw ConfigError("config: at least one mode required");
    if (c < 1) throw ConfigError("config: c must be a positive integer");
    if (laplace_scale < 0.0) throw ConfigError("config: laplace_scale must be nonnegative");
    if (graph_model == GraphModel::erdos_renyi && !(graph_p > 0.0 && graph_p <= 1.0))
        throw ConfigError("config: p must be in (0, 1]");
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean for " + key + ": " + value);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": " + value);
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const long long x = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": " + value);
    }
}

std::vector<PrivacyMode> parse_modes(const std::string& value) {
    std::vector<PrivacyMode> modes;
    std::stringstream ss(value);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (!token.empty()) modes.push_back(parse_privacy_mode(token));
    }
    if (modes.empty()) throw ConfigError("config: empty mode list");
    return modes;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "agents") cfg.num_agents = static_cast<int>(parse_int(key, value));
        else if (key == "dim") cfg.dim = static_cast<int>(parse_int(key, value));
        else if (key == "samples_per_agent")
            cfg.samples_per_agent = static_cast<int>(parse_int(key, value));
        else if (key == "graph") cfg.graph_model = parse_graph_model(value);
        else if (key == "p") cfg.graph_p = parse_double(key, value);
        else if (key == "graph_seed") cfg.graph_seed = static_cast<uint64_t>(parse_int(key, value));
        else if (key == "mu") cfg.mu = parse_double(key, value);
        else if (key == "sigma_g2") cfg.sigma_g2 = parse_double(key, value);
        else if (key == "rho_reg") cfg.rho_reg = parse_double(key, value);
        else if (key == "iterations") cfg.iterations = static_cast<int>(parse_int(key, value));
        else if (key == "trials") cfg.trials = static_cast<int>(parse_int(key, value));
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, value));
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(key, value));
        else if (key == "modes") cfg.modes = parse_modes(value);
        else if (key == "c") cfg.c = static_cast<uint64_t>(parse_int(key, value));
        else if (key == "freeze_split") cfg.freeze_split = parse_bool(key, value);
        else if (key == "fixed_data") cfg.fixed_data = parse_bool(key, value);
        else if (key == "laplace_scale") cfg.laplace_scale = parse_double(key, value);
        else throw ConfigError("config: unknown key " + key);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_config(in);
}

SyntheticDataSpec default_data_spec(int num_agents, int dim, uint64_t seed) {
    SyntheticDataSpec spec;
    Rng rng(derive_seed(seed, seed_tag::model_setup));
    spec.w_star.resize(dim);
    for (double& x : spec.w_star) x = rng.normal();
    spec.r_u.assign(static_cast<size_t>(dim) * dim, 0.0);
    for (int j = 0; j < dim; ++j) spec.r_u[static_cast<size_t>(j) * dim + j] = 1.0;
    spec.sigma_v2.resize(num_agents);
    for (double& s : spec.sigma_v2) s = 0.05 + 0.1 * rng.uniform01();
    return spec;
}

std::vector<AgentDataset> generate_data(const SyntheticDataSpec& spec, int num_agents,
                                        int samples_per_agent, uint64_t seed) {
    const int dim = static_cast<int>(spec.w_star.size());
    if (spec.r_u.size() != static_cast<size_t>(dim) * dim)
        throw ConfigError("generate_data: R_u shape does not match w*");
    if (static_cast<int>(spec.sigma_v2.size()) != num_agents)
        throw ConfigError("generate_data: one sigma_v2 per agent required");
    for (double s : spec.sigma_v2)
        if (!(s > 0.0)) throw ConfigError("generate_data: sigma_v2 must be positive");

    Eigen::MatrixXd r_u(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r_u(i, j) = spec.r_u[static_cast<size_t>(i) * dim + j];
    if (!r_u.isApprox(r_u.transpose()))
        throw ConfigError("generate_data: R_u must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r_u);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
        throw ConfigError("generate_data: R_u must be positive definite");
    const Eigen::MatrixXd sqrt_r =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
        eig.eigenvectors().transpose();

    std::vector<AgentDataset> datasets(num_agents);
    for (int k = 0; k < num_agents; ++k) {
        Rng rng(derive_seed(seed, seed_tag::data, static_cast<uint64_t>(k)));
        const double sigma_v = std::sqrt(spec.sigma_v2[k]);
        datasets[k].samples.resize(samples_per_agent);
        for (auto& sample : datasets[k].samples) {
            Eigen::VectorXd z(dim);
            for (int j = 0; j < dim; ++j) z(j) = rng.normal();
            const Eigen::VectorXd u = sqrt_r * z;
            sample.u.assign(u.data(), u.data() + dim);
            double d = sigma_v * rng.normal();
            for (int j = 0; j < dim; ++j) d += sample.u[j] * spec.w_star[j];
            sample.d = d;
        }
    }
    return datasets;
}

std::vector<double> closed_form_optimum(const std::vector<AgentDataset>& datasets,
                                        double rho_reg, const std::vector<double>& w_star) {
    if (datasets.empty()) throw ConfigError("closed_form_optimum: no datasets");
    const int dim = static_cast<int>(w_star.size());
    Eigen::MatrixXd r_hat = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd r_uv = Eigen::VectorXd::Zero(dim);
    const Eigen::Map<const Eigen::VectorXd> ws(w_star.data(), dim);

    // Pooled moments, each agent's dataset weighted equally.
    for (const auto& ds : datasets) {
        if (ds.samples.empty()) throw ConfigError("closed_form_optimum: empty dataset");
        Eigen::MatrixXd r_k = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd r_uv_k = Eigen::VectorXd::Zero(dim);
        for (const auto& s : ds.samples) {
            const Eigen::Map<const Eigen::VectorXd> u(s.u.data(), dim);
            r_k.noalias() += u * u.transpose();
            r_uv_k.noalias() += u * (s.d - u.dot(ws));
        }
        r_hat += r_k / static_cast<double>(ds.samples.size());
        r_uv += r_uv_k / static_cast<double>(ds.samples.size());
    }
    r_hat /= static_cast<double>(datasets.size());
    r_uv /= static_cast<double>(datasets.size());

    const Eigen::MatrixXd system = r_hat + rho_reg * Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd rhs = r_hat * ws + r_uv;
    const Eigen::VectorXd w_o = system.ldlt().solve(rhs);
    if (!((system * w_o - rhs).norm() <= 1e-8 * (rhs.norm() + 1.0)))
        throw std::runtime_error("closed_form_optimum: singular normal equations");
    return {w_o.data(), w_o.data() + dim};
}

std::vector<double> full_batch_gradient(const std::vector<AgentDataset>& datasets,
                                        const std::vector<double>& w, double rho_reg) {
    std::vector<double> total(w.size(), 0.0);
    for (const auto& ds : datasets) {
        std::vector<double> local(w.size(), 0.0);
        for (const auto& s : ds.samples) {
            const auto g = gradient(w, s, rho_reg);
            for (size_t j = 0; j < w.size(); ++j) local[j] += g[j];
        }
        for (size_t j = 0; j < w.size(); ++j)
            total[j] += local[j] / static_cast<double>(ds.samples.size());
    }
    for (double& x : total) x /= static_cast<double>(datasets.size());
    return total;
}

MetricsTrace msd_metrics(const std::vector<std::vector<std::vector<double>>>& history,
                         const std::vector<double>& w_o) {
    MetricsTrace trace;
    if (history.size() < 2) return trace;
    const size_t iterations = history.size() - 1;
    const size_t dim = w_o.size();
    trace.msd_centroid.reserve(iterations);
    trace.msd_avg.reserve(iterations);
    for (size_t i = 1; i <= iterations; ++i) {
        const auto& snapshot = history[i];
        const double n_agents = static_cast<double>(snapshot.size());
        std::vector<double> centroid(dim, 0.0);
        double avg = 0.0;
        for (const auto& w : snapshot) {
            double dev = 0.0;
            for (size_t j = 0; j < dim; ++j) {
                centroid[j] += w[j];
                const double diff = w[j] - w_o[j];
                dev += diff * diff;
            }
            avg += dev;
        }
        double cent = 0.0;
        for (size_t j = 0; j < dim; ++j) {
            const double diff = centroid[j] / n_agents - w_o[j];
            cent += diff * diff;
        }
        trace.msd_centroid.push_back(cent);
        trace.msd_avg.push_back(avg / n_agents);
    }
    return trace;
}

namespace {

double steady_state_mean(const std::vector<double>& trace) {
    if (trace.empty()) return 0.0;
    const size_t window = std::min<size_t>(100, trace.size());
    double sum = 0.0;
    for (size_t i = trace.size() - window; i < trace.size(); ++i) sum += trace[i];
    return sum / static_cast<double>(window);
}

}  // namespace

uint64_t trial_data_seed(const ExperimentConfig& cfg, int trial) {
    const uint64_t trial_seed = cfg.seed + static_cast<uint64_t>(trial);
    return derive_seed(cfg.fixed_data ? cfg.seed : trial_seed, seed_tag::data);
}

DiffusionConfig trial_diffusion_config(const ExperimentConfig& cfg, int trial) {
    const uint64_t trial_seed = cfg.seed + static_cast<uint64_t>(trial);
    DiffusionConfig dc;
    dc.iterations = cfg.iterations;
    dc.mu = cfg.mu;
    dc.loss.rho_reg = cfg.rho_reg;
    dc.batch_size = cfg.batch_size;
    dc.noise.sigma_g = std::sqrt(cfg.sigma_g2);
    dc.noise.c = cfg.c;
    dc.noise.scale_override = cfg.laplace_scale;
    dc.gradient_seed = trial_seed;
    dc.noise_seed = derive_seed(trial_seed, seed_tag::noise);
    dc.freeze_split = cfg.freeze_split;
    dc.store_payloads = false;
    return dc;
}

ExperimentResult run_trials(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.config = cfg;

    const Adjacency adj =
        build_graph(cfg.num_agents, cfg.graph_model, cfg.graph_p, cfg.graph_seed);
    const CombinationMatrix a = metropolis_weights(adj);
    const SyntheticDataSpec spec = default_data_spec(cfg.num_agents, cfg.dim, cfg.seed);

    for (const PrivacyMode mode : cfg.modes) {
        ModeResult mr;
        mr.mode = mode;
        for (int t = 0; t < cfg.trials; ++t) {
            const auto datasets = generate_data(spec, cfg.num_agents, cfg.samples_per_agent,
                                                trial_data_seed(cfg, t));
            const auto w_o = closed_form_optimum(datasets, cfg.rho_reg, spec.w_star);
            const DiffusionConfig dc = trial_diffusion_config(cfg, t);

            try {
                DiffusionResult run = run_diffusion(dc, adj, a, datasets, mode);
                result.transport_violations += run.log.violations().size();
                result.unprotected_warnings += run.warnings.size();
                mr.trials.push_back(msd_metrics(run.history, w_o));
            } catch (const DivergedError& e) {
                throw std::runtime_error(std::string("run_trials: mode ") + to_string(mode) +
                                         ", trial " + std::to_string(t) + ": " + e.what());
            }
        }
        const size_t iterations = mr.trials.front().msd_centroid.size();
        mr.averaged.msd_centroid.assign(iterations, 0.0);
        mr.averaged.msd_avg.assign(iterations, 0.0);
        for (const auto& trial : mr.trials) {
            for (size_t i = 0; i < iterations; ++i) {
                mr.averaged.msd_centroid[i] += trial.msd_centroid[i];
                mr.averaged.msd_avg[i] += trial.msd_avg[i];
            }
        }
        for (size_t i = 0; i < iterations; ++i) {
            mr.averaged.msd_centroid[i] /= static_cast<double>(cfg.trials);
            mr.averaged.msd_avg[i] /= static_cast<double>(cfg.trials);
        }
        mr.steady_state_centroid = steady_state_mean(mr.averaged.msd_centroid);
        mr.steady_state_avg = steady_state_mean(mr.averaged.msd_avg);
        result.modes.push_back(std::move(mr));
    }
    return result;
}

namespace {

std::string fmt_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv_rows(std::ostream& out, const std::string& mode, const std::string& label,
                    const MetricsTrace& trace) {
    for (size_t i = 0; i < trace.msd_centroid.size(); ++i)
        out << mode << ',' << label << ',' << (i + 1) << ',' << fmt_full(trace.msd_centroid[i])
            << ',' << fmt_full(trace.msd_avg[i]) << '\n';
}

}  // namespace

void export_csv(const ExperimentResult& result, std::ostream& out) {
    out << "mode,trial_or_avg,i,msd_centroid,msd_avg\n";
    for (const auto& mr : result.modes) {
        for (size_t t = 0; t < mr.trials.size(); ++t)
            write_csv_rows(out, to_string(mr.mode), std::to_string(t), mr.trials[t]);
        write_csv_rows(out, to_string(mr.mode), "avg", mr.averaged);
    }
}

void export_svg(const ExperimentResult& result, std::ostream& out) {
    const double width = 900, height = 560;
    const double left = 80, right = 660, top = 50, bottom = 500;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    // Log-scale y range over all plotted averaged traces.
    double lo = 0.0, hi = 0.0;
    bool any = false;
    size_t iterations = 0;
    for (const auto& mr : result.modes) {
        iterations = std::max(iterations, mr.averaged.msd_centroid.size());
        for (double v : mr.averaged.msd_centroid) {
            if (v <= 0.0) continue;
            if (!any) { lo = hi = v; any = true; }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!any) { lo = 1e-6; hi = 1.0; }
    double log_lo = std::floor(std::log10(lo));
    double log_hi = std::ceil(std::log10(hi));
    if (log_hi <= log_lo) log_hi = log_lo + 1.0;

    auto x_of = [&](double i) {
        return left + (right - left) * (iterations <= 1 ? 0.0 : (i - 1) / (double)(iterations - 1));
    };
    auto y_of = [&](double v) {
        const double lv = std::log10(std::max(v, std::pow(10.0, log_lo)));
        return bottom - (bottom - top) * (lv - log_lo) / (log_hi - log_lo);
    };
    char buf[160];

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << (left + right) / 2
        << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << "Centroid MSD per iteration (trial average)</text>\n";

    for (double e = log_lo; e <= log_hi + 0.5; e += 1.0) {
        const double y = y_of(std::pow(10.0, e));
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                      "stroke=\"#dddddd\"/>\n",
                      left, y, right, y);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                      "font-family=\"sans-serif\" font-size=\"12\">1e%+d</text>\n",
                      left - 8, y + 4, static_cast<int>(e));
        out << buf;
    }
    for (int tick = 0; tick <= 4; ++tick) {
        const double i = 1 + tick * (static_cast<double>(iterations) - 1) / 4.0;
        const double x = x_of(i);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                      "stroke=\"#aaaaaa\"/>\n",
                      x, bottom, x, bottom + 6);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                      "font-family=\"sans-serif\" font-size=\"12\">%d</text>\n",
                      x, bottom + 22, static_cast<int>(std::lround(i)));
        out << buf;
    }
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\" font-size=\"13\">iteration</text>\n",
                  (left + right) / 2, bottom + 45);
    out << buf;

    size_t mode_idx = 0;
    for (const auto& mr : result.modes) {
        const char* color = palette[mode_idx % 4];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < mr.averaged.msd_centroid.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(static_cast<double>(i + 1)),
                          y_of(mr.averaged.msd_centroid[i]));
            out << buf;
        }
        out << "\"/>\n";
        const double ly = top + 24.0 * static_cast<double>(mode_idx);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"2\"/>\n",
                      right + 16, ly, right + 46, ly, color);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
                      "font-size=\"13\">%s</text>\n",
                      right + 52, ly + 4, to_string(mr.mode));
        out << buf;
        ++mode_idx;
    }
    out << "</svg>\n";
}

void write_summary(const ExperimentResult& result, std::ostream& out) {
    const auto& cfg = result.config;
    out << "agents " << cfg.num_agents << "  dim " << cfg.dim << "  samples_per_agent "
        << cfg.samples_per_agent << "  graph " << to_string(cfg.graph_model) << "  iterations "
        << cfg.iterations << "  trials " << cfg.trials << '\n';
    out << "mu " << cfg.mu << "  sigma_g2 " << cfg.sigma_g2 << "  rho_reg " << cfg.rho_reg
        << "  batch_size " << cfg.batch_size << "  seed " << cfg.seed << '\n';
    out << '\n';
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-28s %16s %16s\n", "mode", "steady_centroid", "steady_avg");
    out << buf;
    for (const auto& mr : result.modes) {
        std::snprintf(buf, sizeof buf, "%-28s %16.6e %16.6e\n", to_string(mr.mode),
                      mr.steady_state_centroid, mr.steady_state_avg);
        out << buf;
    }
    out << '\n';
    out << "steady-state window: last " << std::min(100, cfg.iterations) << " iterations\n";
    out << "transport violations: " << result.transport_violations << '\n';
    out << "unprotected-edge warnings: " << result.unprotected_warnings << '\n';
}

void export_results(const ExperimentResult& result, ExportFormat format,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    if (format == ExportFormat::csv)
        export_csv(result, out);
    else
        export_svg(result, out);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace lgh
