#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "pve/common.hpp"
#include "pve/config.hpp"
#include "pve/delaunay.hpp"
#include "pve/ecdf.hpp"
#include "pve/sampling.hpp"
#include "pve/voronoi.hpp"

namespace pve {

/// Normalized (sqrt(lambda)-scaled) extreme generator-to-vertex distances of
/// one interior cell.
struct ExtremesRecord {
    double r_min_norm = 0.0;
    double r_max_norm = 0.0;
};

/// Ordered normalized half-gap distances (lambda*Y/2) of one interior 1D cell.
struct OneDRecord {
    double d_min_norm = 0.0;
    double d_max_norm = 0.0;
};

/// Min/max distance from the generator to its cell vertices, scaled by
/// sqrt(lambda). The cell must be interior.
inline ExtremesRecord cell_extremes(const geom::VoronoiCell& cell, const PointSet2D& points,
                                    double lambda) {
    if (!cell.interior) {
        throw ContractViolation("cell_extremes: called on a non-interior cell");
    }
    const Vec2 g = points.points[cell.generator];
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Vec2& v : cell.vertices) {
        const double d = dist(g, v);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    const double root = std::sqrt(lambda);
    return {lo * root, hi * root};
}

struct EcdfGridSpec {
    uint32_t bins = 4096;
    double r_min_cap = 1.5;
    double r_max_cap = 3.0;
    double r_vertex_cap = 2.5;
};

struct Report2D {
    uint64_t windows = 0;
    uint64_t total_points = 0;     // generated Voronoi cells, interior or not
    uint64_t interior_cells = 0;
    uint64_t vertex_samples = 0;
    std::vector<uint32_t> empty_windows;  // windows with zero interior cells
    double wall_seconds = 0.0;            // goes to the manifest, not the report

    double interior_fraction() const {
        return total_points == 0 ? 0.0
                                 : static_cast<double>(interior_cells) /
                                       static_cast<double>(total_points);
    }
};

struct Experiment2DResult {
    EcdfAccumulator r_min;
    EcdfAccumulator r_max;
    EcdfAccumulator r_vertex;
    Report2D report;
};

namespace detail {

inline void process_window_2d(const SimConfig2D& config, uint32_t w, Experiment2DResult& acc,
                              std::vector<ExtremesRecord>* raw_pairs) {
    const PointSet2D ps = sample_window_2d(config, w);
    if (ps.points.size() < 3) {
        acc.report.total_points += ps.points.size();
        acc.report.empty_windows.push_back(w);
        return;
    }
    const geom::Triangulation tri = geom::triangulate(ps.points);
    const auto circles = geom::circumcircles(tri);
    auto cells = geom::voronoi_cells(tri, circles);
    const double root = std::sqrt(config.lambda);
    uint64_t interior = 0;
    for (auto& cell : cells) {
        cell.interior = geom::is_interior(cell, tri, circles, ps.side);
        if (!cell.interior) continue;
        ++interior;
        const ExtremesRecord rec = cell_extremes(cell, ps, config.lambda);
        acc.r_min.add(rec.r_min_norm);
        acc.r_max.add(rec.r_max_norm);
        if (raw_pairs) raw_pairs->push_back(rec);
        const Vec2 g = ps.points[cell.generator];
        for (const Vec2& v : cell.vertices) {
            acc.r_vertex.add(dist(g, v) * root);
            ++acc.report.vertex_samples;
        }
    }
    acc.report.total_points += ps.points.size();
    acc.report.interior_cells += interior;
    if (interior == 0) acc.report.empty_windows.push_back(w);
}

}  // namespace detail

/// Monte-Carlo 2D experiment: per interior cell one (r_min, r_max) pair plus
/// every individual normalized generator-vertex distance (the closed-form
/// cross-check stream). Windows are distributed over `config.shards` threads;
/// the merged result is bit-identical for any shard count. If `raw_pairs` is
/// non-null it receives one vector of (r_min, r_max) records per window.
inline Experiment2DResult run_2d_experiment(const SimConfig2D& config,
                                            const EcdfGridSpec& grid = {},
                                            std::vector<std::vector<ExtremesRecord>>* raw_pairs =
                                                nullptr) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto make_empty = [&grid] {
        return Experiment2DResult{EcdfAccumulator(grid.bins, grid.r_min_cap),
                                  EcdfAccumulator(grid.bins, grid.r_max_cap),
                                  EcdfAccumulator(grid.bins, grid.r_vertex_cap), Report2D{}};
    };

    const uint32_t shards = std::min(config.shards, config.windows);
    std::vector<Experiment2DResult> parts;
    parts.reserve(shards);
    for (uint32_t s = 0; s < shards; ++s) parts.push_back(make_empty());
    if (raw_pairs) {
        raw_pairs->clear();
        raw_pairs->resize(config.windows);
    }

    std::vector<std::exception_ptr> errors(shards);
    std::vector<std::thread> workers;
    workers.reserve(shards);
    for (uint32_t s = 0; s < shards; ++s) {
        workers.emplace_back([&, s] {
            try {
                for (uint32_t w = s; w < config.windows; w += shards) {
                    try {
                        detail::process_window_2d(config, w, parts[s],
                                                  raw_pairs ? &(*raw_pairs)[w] : nullptr);
                    } catch (const std::exception& e) {
                        throw GeometryError("window " + std::to_string(w) + ": " + e.what());
                    }
                }
            } catch (...) {
                errors[s] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    Experiment2DResult out = make_empty();
    for (auto& p : parts) {
        out.r_min.merge(p.r_min);
        out.r_max.merge(p.r_max);
        out.r_vertex.merge(p.r_vertex);
        out.report.total_points += p.report.total_points;
        out.report.interior_cells += p.report.interior_cells;
        out.report.vertex_samples += p.report.vertex_samples;
        out.report.empty_windows.insert(out.report.empty_windows.end(),
                                        p.report.empty_windows.begin(),
                                        p.report.empty_windows.end());
    }
    std::sort(out.report.empty_windows.begin(), out.report.empty_windows.end());
    out.report.windows = config.windows;
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

struct Report1D {
    uint64_t windows = 0;
    uint64_t total_points = 0;
    uint64_t interior_cells = 0;
    double wall_seconds = 0.0;
};

struct Experiment1DResult {
    EcdfAccumulator d_min;
    EcdfAccumulator d_max;
    Report1D report;
};

struct EcdfGridSpec1D {
    uint32_t bins = 4096;
    double d_min_cap = 2.5;
    double d_max_cap = 6.0;
};

/// 1D experiment: every seed except the two ends of the line is an interior
/// cell; its two normalized half-gaps lambda*Y/2 yield one (min, max) pair.
inline Experiment1DResult run_1d_experiment(const SimConfig1D& config,
                                            const EcdfGridSpec1D& grid = {}) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto make_empty = [&grid] {
        return Experiment1DResult{EcdfAccumulator(grid.bins, grid.d_min_cap),
                                  EcdfAccumulator(grid.bins, grid.d_max_cap), Report1D{}};
    };

    const uint32_t shards = std::min(config.shards, config.windows);
    std::vector<Experiment1DResult> parts;
    parts.reserve(shards);
    for (uint32_t s = 0; s < shards; ++s) parts.push_back(make_empty());
    std::vector<std::exception_ptr> errors(shards);
    std::vector<std::thread> workers;
    for (uint32_t s = 0; s < shards; ++s) {
        workers.emplace_back([&, s] {
            try {
                for (uint32_t w = s; w < config.windows; w += shards) {
                    const std::vector<double> xs = sample_line_1d(config, w);
                    parts[s].report.total_points += xs.size();
                    if (xs.size() < 3) continue;  // no interior cells
                    for (size_t i = 1; i + 1 < xs.size(); ++i) {
                        const double left = 0.5 * config.lambda * (xs[i] - xs[i - 1]);
                        const double right = 0.5 * config.lambda * (xs[i + 1] - xs[i]);
                        const OneDRecord rec{std::min(left, right), std::max(left, right)};
                        parts[s].d_min.add(rec.d_min_norm);
                        parts[s].d_max.add(rec.d_max_norm);
                        ++parts[s].report.interior_cells;
                    }
                }
            } catch (...) {
                errors[s] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    Experiment1DResult out = make_empty();
    for (auto& p : parts) {
        out.d_min.merge(p.d_min);
        out.d_max.merge(p.d_max);
        out.report.total_points += p.report.total_points;
        out.report.interior_cells += p.report.interior_cells;
    }
    out.report.windows = config.windows;
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace pve
