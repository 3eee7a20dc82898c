#include "lgh/privacy_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lgh/errors.hpp"
#include "lgh/rng.hpp"

namespace lgh {

double epsilon_bound(long long i, double sigma_g, double mu, const EpsilonConstants& consts) {
    if (i < 1) throw ConfigError("epsilon_bound: defined for i >= 1");
    if (!(sigma_g > 0.0)) throw ConfigError("epsilon_bound: sigma_g must be positive");
    if (!(mu > 0.0)) throw ConfigError("epsilon_bound: mu must be positive");
    if (consts.a < 0.0 || consts.b < 0.0 || consts.half_coeff < 0.0 || !(consts.mu_coeff > 0.0))
        throw ConfigError("epsilon_bound: constants must be nonnegative, mu_coeff positive");
    const double rate = consts.mu_coeff * mu;
    if (!(rate < 1.0)) throw ConfigError("epsilon_bound: mu_coeff * mu must be below 1");

    const double geometric =
        (1.0 - std::pow(1.0 - rate, static_cast<double>(i) + 1.0)) / rate - 1.0;
    const double braces = geometric * consts.a + consts.b +
                          consts.half_coeff * std::sqrt(mu) * static_cast<double>(i - 1);
    return 2.0 * std::sqrt(2.0) / sigma_g * braces;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw ConfigError("ks_statistic: empty sample set");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t j = 0; j < samples.size(); ++j) {
        const double f = cdf(samples[j]);
        d = std::max(d, std::abs(static_cast<double>(j + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(j) / n));
    }
    return d;
}

double ks_critical(size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }

double cdf_uniform01(double x) { return std::clamp(x, 0.0, 1.0); }

double cdf_exp1(double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); }

double cdf_laplace(double x, double scale) {
    return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

std::vector<AuditReport> audit_noise_pipeline(size_t n, double sigma_g, uint64_t c, uint64_t seed,
                                              double scale_override) {
    if (n == 0) throw ConfigError("audit_noise_pipeline: need samples");
    NoiseParams params;
    params.sigma_g = sigma_g;
    params.c = c;
    params.scale_override = scale_override;
    const double scale = params.laplace_scale();

    Rng pos_rng(derive_seed(seed, seed_tag::audit, 0));
    Rng neg_rng(derive_seed(seed, seed_tag::audit, 1));

    std::vector<double> products, raws, shared, noises;
    products.reserve(n);
    raws.reserve(n);
    shared.reserve(n);
    noises.reserve(n);
    while (noises.size() < n) {
        const SecretKeys sl = sample_secrets(SplitRole::positive_side_uniform, pos_rng);
        const SecretKeys sm = sample_secrets(SplitRole::negative_side_gamma, neg_rng);
        const PublicKeys pl = public_key(sl);
        const PublicKeys pm = public_key(sm);
        if (!(pl.p > 0 && pl.p < 1 && pl.p_prime > 0 && pl.p_prime < 1) ||
            !(pm.p > 0 && pm.p < 1 && pm.p_prime > 0 && pm.p_prime < 1))
            continue;
        const double u = derive_shared_uniform(sl.v, pm.p, c);
        const double u_prime = derive_shared_uniform(sl.v_prime, pm.p_prime, c);
        if (u == 0.0 || u_prime == 0.0) continue;
        products.push_back(sl.v * sm.v);
        raws.push_back(std::exp(-sl.v * sm.v));
        shared.push_back(u);
        noises.push_back(laplace_from_keys(u, u_prime, scale));
    }

    const double critical = ks_critical(n);
    std::vector<AuditReport> reports;
    auto add_ks = [&](const std::string& name, const std::vector<double>& xs,
                      const std::function<double(double)>& cdf) {
        const double d = ks_statistic(xs, cdf);
        reports.push_back({name, n, d, critical, d < critical});
    };
    add_ks("secret_product_vs_exp1", products, cdf_exp1);
    add_ks("exp_product_vs_uniform", raws, cdf_uniform01);
    add_ks("shared_key_vs_uniform", shared, cdf_uniform01);
    add_ks("noise_vs_laplace", noises,
           [&](double x) { return cdf_laplace(x, sigma_g / std::sqrt(2.0)); });

    double mean = 0.0;
    for (double x : noises) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : noises) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    const double target = sigma_g * sigma_g;
    const double rel_err = std::abs(var - target) / target;
    reports.push_back({"noise_variance_rel_err", n, rel_err, 0.05, rel_err < 0.05});
    return reports;
}

double verify_global_condition(const std::vector<EdgeMask>& all_masks,
                               const CombinationMatrix& a) {
    if (all_masks.empty()) return 0.0;
    const size_t dim = all_masks.front().mask.size();
    std::vector<double> total(dim, 0.0);
    for (const auto& em : all_masks) {
        const double w = a(em.sender, em.hub);
        for (size_t coord = 0; coord < dim; ++coord) total[coord] += w * em.mask[coord];
    }
    double residual = 0.0;
    for (double x : total) residual = std::max(residual, std::abs(x));
    return residual;
}

}  // namespace lgh
