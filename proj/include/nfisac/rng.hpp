#ifndef NFISAC_RNG_HPP
#define NFISAC_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

// All randomness flows from one master seed. Independent work items (a
// Monte-Carlo trial, a user's channel draw) get their own stream derived from
// (master seed, tag, indices), so results do not depend on evaluation order
// or thread count. Gaussian draws use an explicit Box-Muller transform; the
// standard library distributions are not pinned down by the standard and we
// need byte-identical reruns.

namespace nfisac {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// FNV-1a, used to turn stream tags into mixing constants at compile time.
constexpr std::uint64_t stream_tag(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (; *s; ++s) h = (h ^ static_cast<std::uint64_t>(*s)) * 0x100000001b3ull;
    return h;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Child stream for work item (tag, i, j, k).
    static Rng stream(std::uint64_t master, std::uint64_t tag, std::uint64_t i = 0,
                      std::uint64_t j = 0, std::uint64_t k = 0) {
        std::uint64_t h = splitmix64(master ^ tag);
        h = splitmix64(h ^ splitmix64(i));
        h = splitmix64(h ^ splitmix64(j));
        h = splitmix64(h ^ splitmix64(k));
        return Rng(h);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection keeps the draw unbiased for any n.
        const std::uint64_t lim = ~0ull - (~0ull % n);
        std::uint64_t x;
        do { x = engine_(); } while (x >= lim);
        return x % n;
    }

    // Standard normal via Box-Muller; caches the second draw.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Circularly symmetric complex Gaussian with the given per-component
    // standard deviation.
    std::complex<double> cnormal(double component_stddev) {
        const double re = normal() * component_stddev;
        const double im = normal() * component_stddev;
        return {re, im};
    }

    std::complex<double> unit_phase() {
        const double a = uniform(0.0, 6.283185307179586476925286766559);
        return {std::cos(a), std::sin(a)};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace nfisac

#endif
