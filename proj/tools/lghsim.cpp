#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lgh/diffusion.hpp"
#include "lgh/errors.hpp"
#include "lgh/experiment.hpp"
#include "lgh/noise_protocol.hpp"
#include "lgh/privacy_metrics.hpp"
#include "lgh/rng.hpp"
#include "lgh/topology.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& modes_csv, bool dump_history) {
    lgh::ExperimentConfig cfg = lgh::load_config_file(config_path);
    if (!modes_csv.empty()) {
        cfg.modes.clear();
        std::stringstream ss(modes_csv);
        std::string token;
        while (std::getline(ss, token, ','))
            if (!token.empty()) cfg.modes.push_back(lgh::parse_privacy_mode(token));
        cfg.validate();
    }

    std::filesystem::create_directories(out_dir);
    const lgh::ExperimentResult result = lgh::run_trials(cfg);

    lgh::export_results(result, lgh::ExportFormat::csv, out_dir + "/results.csv");
    lgh::export_results(result, lgh::ExportFormat::svg, out_dir + "/msd.svg");
    {
        std::ofstream summary(out_dir + "/summary.txt");
        if (!summary) throw lgh::IoError("cannot write: " + out_dir + "/summary.txt");
        lgh::write_summary(result, summary);
    }
    if (dump_history) {
        // Replay the first trial of each mode with its exact seeds and keep
        // the full iterate history.
        const lgh::Adjacency adj =
            lgh::build_graph(cfg.num_agents, cfg.graph_model, cfg.graph_p, cfg.graph_seed);
        const lgh::CombinationMatrix a = lgh::metropolis_weights(adj);
        const auto spec = lgh::default_data_spec(cfg.num_agents, cfg.dim, cfg.seed);
        const auto datasets = lgh::generate_data(spec, cfg.num_agents, cfg.samples_per_agent,
                                                 lgh::trial_data_seed(cfg, 0));
        for (const auto mode : cfg.modes) {
            const auto run = lgh::run_diffusion(lgh::trial_diffusion_config(cfg, 0), adj, a,
                                                datasets, mode);
            const std::string path =
                out_dir + "/history_" + std::string(lgh::to_string(mode)) + ".csv";
            std::ofstream out(path);
            if (!out) throw lgh::IoError("cannot write: " + path);
            lgh::export_history(run.history, out);
        }
    }
    lgh::write_summary(result, std::cout);
    std::cout << "wrote " << out_dir << "/results.csv, summary.txt, msd.svg\n";
    return 0;
}

void dump_noise_records(const std::string& path, double sigma_g) {
    // Fixed small scenario: the default random topology, 50 iterations of
    // the key-exchange protocol, no learning involved.
    const lgh::Adjacency adj = lgh::build_graph(30, lgh::GraphModel::erdos_renyi, 0.2, 1);
    lgh::NoiseParams params;
    params.sigma_g = sigma_g;
    std::vector<lgh::Rng> rngs;
    for (int k = 0; k < adj.num_agents; ++k)
        rngs.emplace_back(lgh::derive_seed(7, lgh::seed_tag::noise, static_cast<uint64_t>(k)));

    std::ofstream out(path);
    if (!out) throw lgh::IoError("cannot write: " + path);
    out << "i,k,l,m,coord,g\n";
    char buf[64];
    for (int i = 1; i <= 50; ++i) {
        lgh::TransportLog log(false);
        for (int k = 0; k < adj.num_agents; ++k) {
            const auto split = lgh::split_neighborhood(
                k, adj, lgh::derive_seed(7, lgh::seed_tag::split, static_cast<uint64_t>(i)));
            const auto batch =
                lgh::generate_pair_noises(split, params, 2, i, log, adj, rngs);
            for (const auto& rec : batch.records) {
                for (size_t coord = 0; coord < rec.noise.size(); ++coord) {
                    std::snprintf(buf, sizeof buf, "%.17g", rec.noise[coord]);
                    out << i << ',' << (rec.hub + 1) << ',' << (rec.positive_agent + 1) << ','
                        << (rec.negative_agent + 1) << ',' << coord << ',' << buf << '\n';
                }
            }
        }
    }
}

void dump_transport_log(const std::string& path) {
    // Short privatized run over the default topology, full message log.
    const lgh::Adjacency adj = lgh::build_graph(30, lgh::GraphModel::erdos_renyi, 0.2, 1);
    const lgh::CombinationMatrix a = lgh::metropolis_weights(adj);
    const auto spec = lgh::default_data_spec(30, 2, 7);
    const auto datasets = lgh::generate_data(spec, 30, 20, 8);
    lgh::DiffusionConfig cfg;
    cfg.iterations = 10;
    cfg.mu = 0.1;
    const auto run =
        lgh::run_diffusion(cfg, adj, a, datasets, lgh::PrivacyMode::local_graph_homomorphic);
    std::ofstream out(path);
    if (!out) throw lgh::IoError("cannot write: " + path);
    run.log.dump(out);
}

int cmd_verify(size_t samples, double sigma_g2, const std::string& dump_path,
               const std::string& transport_path) {
    const double sigma_g = std::sqrt(sigma_g2);
    const auto reports = lgh::audit_noise_pipeline(samples, sigma_g, 65536);

    std::printf("%-26s %9s %12s %12s %6s\n", "test", "n", "statistic", "critical", "pass");
    bool all_pass = true;
    for (const auto& r : reports) {
        std::printf("%-26s %9zu %12.6f %12.6f %6s\n", r.name.c_str(), r.samples, r.statistic,
                    r.critical, r.pass ? "yes" : "NO");
        all_pass = all_pass && r.pass;
    }
    if (!dump_path.empty()) {
        dump_noise_records(dump_path, sigma_g);
        std::printf("noise records written to %s\n", dump_path.c_str());
    }
    if (!transport_path.empty()) {
        dump_transport_log(transport_path);
        std::printf("transport log written to %s\n", transport_path.c_str());
    }
    return all_pass ? 0 : 1;
}

int cmd_graph(const std::string& config_path, const std::string& out_path) {
    const lgh::ExperimentConfig cfg = lgh::load_config_file(config_path);
    int retries = 0;
    const lgh::Adjacency adj =
        lgh::build_graph(cfg.num_agents, cfg.graph_model, cfg.graph_p, cfg.graph_seed, &retries);
    const lgh::CombinationMatrix a = lgh::metropolis_weights(adj);

    std::ofstream out(out_path);
    if (!out) throw lgh::IoError("cannot write: " + out_path);
    out << "# edges (src dst, 1-indexed)\n";
    lgh::write_edge_list(adj, out);
    out << "# weights (k m a_mk)\n";
    char buf[48];
    for (int k = 0; k < adj.num_agents; ++k) {
        for (int m : adj.neighbor_sets[k]) {
            std::snprintf(buf, sizeof buf, "%.17g", a(m, k));
            out << (k + 1) << ' ' << (m + 1) << ' ' << buf << '\n';
        }
    }
    std::cout << "wrote " << out_path << " (" << adj.num_agents << " agents";
    if (cfg.graph_model == lgh::GraphModel::erdos_renyi)
        std::cout << ", " << retries << " connectivity retries";
    std::cout << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized diffusion learning with pairwise-cancelling privacy noise"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the multi-trial experiment and export results");
    std::string config_path, out_dir = ".", modes_csv;
    bool dump_history = false;
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out-dir", out_dir, "output directory (default: current)");
    run->add_option("--modes", modes_csv, "override modes, e.g. non_private,naive,lgh");
    run->add_flag("--dump-history", dump_history,
                  "also write history_<mode>.csv for each mode's first trial");

    auto* verify = app.add_subcommand("verify", "Run the statistical audit of the noise chain");
    size_t samples = 100000;
    double sigma_g2 = 0.01;
    std::string dump_path, transport_path;
    verify->add_option("--samples", samples, "audit sample count (default 100000)");
    verify->add_option("--sigma-g2", sigma_g2, "target noise variance (default 0.01)");
    verify->add_option("--dump-noise", dump_path, "also write a noise-record CSV");
    verify->add_option("--dump-transport", transport_path,
                       "also write a message-log dump of a short privatized run");

    auto* graph = app.add_subcommand("graph", "Emit the edge list and combination matrix");
    std::string graph_config, graph_out;
    graph->add_option("--config", graph_config, "experiment config file")->required();
    graph->add_option("--out", graph_out, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, modes_csv, dump_history);
        if (verify->parsed()) return cmd_verify(samples, sigma_g2, dump_path, transport_path);
        if (graph->parsed()) return cmd_graph(graph_config, graph_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
