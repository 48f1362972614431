#ifndef PFMA_RNG_HPP
#define PFMA_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace pfma {

/// splitmix64 finalizer (Vigna). Bijective on uint64, used to spread seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

/// Deterministic random stream. All distributions are generated from raw
/// mt19937_64 output with fixed algorithms (53-bit uniforms, Box-Muller
/// normals), so sequences are reproducible across platforms and standard
/// library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

    /// Stream splitting rule: trial k of master seed s is seeded with
    /// mix64(s + (k+1) * 0x9e3779b97f4a7c15). Distinct trials yield distinct
    /// seeds (the map is injective for k < 2^64 - 1).
    static RandomStream for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
        return RandomStream(master_seed + (trial_index + 1) * 0x9e3779b97f4a7c15ULL);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (cosine branch).
    double standard_normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Circularly symmetric complex Gaussian with unit total variance
    /// (real and imaginary parts each N(0, 1/2)).
    std::complex<double> complex_normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pfma

#endif  // PFMA_RNG_HPP
