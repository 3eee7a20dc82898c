#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lgh {

// SplitMix64 finalizer, used to decorrelate derived seeds.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives a child seed from a base seed and up to three stream labels
// (purpose tag, agent index, iteration, ...).
constexpr uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix64(base ^ 0x6a09e667f3bcc909ull);
    s = mix64(s ^ a);
    s = mix64(s ^ b);
    s = mix64(s ^ c);
    return s;
}

// Stream purpose tags; keeping them distinct guarantees that e.g. the
// gradient-sampling stream never overlaps the noise-protocol stream.
namespace seed_tag {
inline constexpr uint64_t graph = 0x47u;
inline constexpr uint64_t split = 0x53u;
inline constexpr uint64_t data = 0x44u;
inline constexpr uint64_t gradient = 0x67u;
inline constexpr uint64_t noise = 0x4eu;
inline constexpr uint64_t model_setup = 0x4du;
inline constexpr uint64_t audit = 0x41u;
}  // namespace seed_tag

// Deterministic random stream. All variates are produced from raw 64-bit
// draws with explicit transforms, so sequences do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform on (0,1]; never 0, so logarithms stay finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    uint64_t uniform_below(uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Gamma(2,1) as the sum of two unit exponentials; exact and branch-free,
    // so the stream advances by exactly two draws.
    double gamma2() { return -std::log(uniform01()) - std::log(uniform01()); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lgh
