#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pve {

// Error taxonomy; the CLI maps these onto process exit codes.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : UsageError {
    using UsageError::UsageError;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SampleSizeError : DataError {
    using DataError::DataError;
};
struct DegenerateDataError : DataError {
    using DataError::DataError;
};
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double dist_sq(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

}  // namespace pve
