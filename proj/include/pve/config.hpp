#pragma once

#include <cstdint>
#include <string>

#include "pve/common.hpp"

namespace pve {

struct SimConfig2D {
    double lambda = 1.0;    // points per unit area
    double area = 1e5;      // window area; window is [0, sqrt(area)]^2
    uint32_t windows = 10;  // independent windows
    uint64_t seed = 0;
    uint32_t shards = 4;

    void validate() const {
        if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
        if (!(area > 0.0)) throw ConfigError("area must be > 0");
        if (windows < 1) throw ConfigError("windows must be >= 1");
        if (shards < 1) throw ConfigError("shards must be >= 1");
        if (lambda * area < 100.0) {
            throw ConfigError("expected points per window lambda*area must be >= 100 "
                              "(smaller windows yield no valid interior cells)");
        }
    }
};

struct SimConfig1D {
    double lambda = 1.0;  // points per unit length
    double length = 1e6;
    uint32_t windows = 1;
    uint64_t seed = 0;
    uint32_t shards = 1;

    void validate() const {
        if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
        if (!(length > 0.0)) throw ConfigError("length must be > 0");
        if (windows < 1) throw ConfigError("windows must be >= 1");
        if (shards < 1) throw ConfigError("shards must be >= 1");
    }
};

}  // namespace pve
