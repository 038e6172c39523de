#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace acmamba {

// Seeded generator with fully specified output transforms. mt19937_64 is
// identical across platforms; std::uniform_real_distribution and friends are
// not, so the distribution mapping is done here by hand. Every result is a
// pure function of the seed and the call sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t nextU64() { return engine_(); }

    // Uniform in [0, 1) with 53 significant bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Integer in [0, n), n >= 1. Rejection-free modulo bias is negligible for
    // the small ranges used here, but do it properly anyway.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller (no cached spare: keeps the call
    // sequence trivially reproducible).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    bool coin() { return (engine_() & 1u) != 0; }

private:
    std::mt19937_64 engine_;
};

} // namespace acmamba
