#pragma once

#include <algorithm>
#include <vector>

#include "pve/common.hpp"
#include "pve/config.hpp"
#include "pve/rng.hpp"

namespace pve {

/// Generator seeds of one simulation window, coordinates in [0, side]^2.
struct PointSet2D {
    std::vector<Vec2> points;
    double side = 0.0;
};

/// One window of a homogeneous 2D Poisson point process. The random stream
/// is keyed on (seed, window_index), so any shard may produce any window.
inline PointSet2D sample_window_2d(const SimConfig2D& config, uint32_t window_index) {
    config.validate();
    Rng rng(config.seed, window_index);
    const double side = std::sqrt(config.area);
    const uint64_t n = poisson_sample(config.lambda * config.area, rng);
    PointSet2D out;
    out.side = side;
    out.points.resize(n);
    for (auto& p : out.points) {
        p.x = rng.uniform(0.0, side);
        p.y = rng.uniform(0.0, side);
    }
    return out;
}

/// One window of a homogeneous 1D Poisson process on [0, length], sorted.
inline std::vector<double> sample_line_1d(const SimConfig1D& config, uint32_t window_index) {
    config.validate();
    Rng rng(config.seed, window_index);
    const uint64_t n = poisson_sample(config.lambda * config.length, rng);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.uniform(0.0, config.length);
    std::sort(xs.begin(), xs.end());
    return xs;
}

}  // namespace pve
