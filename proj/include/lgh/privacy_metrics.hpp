#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lgh/noise_protocol.hpp"

namespace lgh {

// Constants of the privacy-loss bound. The underlying analysis only fixes
// their existence, so they are user-supplied inputs; the evaluator is a
// bound shape, not a certified accountant.
struct EpsilonConstants {
    double a = 1.0;           // additive constant on the geometric term
    double b = 1.0;           // standalone additive constant
    double mu_coeff = 1.0;    // contraction rate is mu_coeff * mu
    double half_coeff = 1.0;  // coefficient of the sqrt(mu) * (i-1) term
};

// eps(i) = (2*sqrt(2)/sigma_g) * { ((1-(1-mu_coeff*mu)^(i+1))/(mu_coeff*mu) - 1)*a
//                                  + b + half_coeff*sqrt(mu)*(i-1) },  i >= 1.
double epsilon_bound(long long i, double sigma_g, double mu, const EpsilonConstants& consts);

// Two-sided Kolmogorov-Smirnov statistic of the samples against a reference
// CDF. Throws ConfigError on an empty sample set.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic 5%-level critical value 1.358/sqrt(n).
double ks_critical(size_t n);

double cdf_uniform01(double x);
double cdf_exp1(double x);
double cdf_laplace(double x, double scale);

struct AuditReport {
    std::string name;
    size_t samples = 0;
    double statistic = 0.0;
    double critical = 0.0;
    bool pass = false;  // statistic < critical
};

// Runs the distributional audit of the key-exchange noise chain on n
// protocol draws: secret product vs Exp(1), e^(-product) vs U(0,1), shared
// key vs U(0,1), noise vs Laplace, plus a relative variance check against
// sigma_g^2 (threshold 0.05). Deterministic for a fixed seed.
std::vector<AuditReport> audit_noise_pipeline(size_t n, double sigma_g, uint64_t c,
                                              uint64_t seed = 0x5eedu,
                                              double scale_override = 0.0);

// Max-norm of the network-wide double sum over all masks of
// a_{sender,hub} * mask; bounded by K times the local tolerance for
// cancelling noise.
double verify_global_condition(const std::vector<EdgeMask>& all_masks,
                               const CombinationMatrix& a);

}  // namespace lgh
