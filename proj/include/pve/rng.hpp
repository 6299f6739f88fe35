#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "pve/common.hpp"
#include "pve/special.hpp"

namespace pve {

inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    uint64_t state = 0;
    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ keyed per (seed, stream). Streams derived from distinct
/// stream ids are independent regardless of which shard consumes them,
/// which is what makes sharded runs order-independent.
class Rng {
  public:
    Rng(uint64_t seed, uint64_t stream_id) {
        SplitMix64 sm{mix64(seed) ^ mix64(stream_id + 0xA3C59AC2ull)};
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Box-Muller, one value per call).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Gamma(shape, rate=1) via Marsaglia-Tsang.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::domain_error("gamma sampler: shape must be > 0");
        if (shape < 1.0) {
            const double u = 1.0 - uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = 1.0 - uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> s_{};
};

/// Poisson(mean) sample. Inversion by sequential search below mean 30,
/// Hoermann's transformed rejection (PTRD) above.
inline uint64_t poisson_sample(double mean, Rng& rng) {
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw ConfigError("poisson_sample: mean must be positive and finite, got " +
                          std::to_string(mean));
    }
    if (mean < 30.0) {
        const double limit = std::exp(-mean);
        uint64_t k = 0;
        double p = rng.uniform();
        while (p > limit) {
            ++k;
            p *= rng.uniform();
        }
        return k;
    }
    // PTRD (Hoermann 1993), exact for all large means.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        if (lhs <= kf * std::log(mean) - mean - log_gamma(kf + 1.0)) {
            return static_cast<uint64_t>(kf);
        }
    }
}

}  // namespace pve
