#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ccoa {

// Seeded randomness helpers. Distribution sampling is hand-rolled on top of
// mt19937_64 so that a given seed produces the same stream on every platform
// and standard library (std::uniform_real_distribution makes no such promise).

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

/// Standard normal via Box-Muller.
inline double normal_unit(Rng& rng) {
    double u1 = uniform_unit(rng);
    double u2 = uniform_unit(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace ccoa
