#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace wiener {

/// Seeded generator with a fixed, documented algorithm: std::mt19937_64
/// (fully specified by the C++ standard) and uniform doubles built from the
/// top 53 bits of each draw. Streams are bit-reproducible per seed on every
/// conforming platform, unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform01() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return r % n;
    }

    /// Standard normal by Box-Muller on uniform01.
    double normal() noexcept {
        double u1 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace wiener
