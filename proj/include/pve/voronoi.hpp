#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "pve/common.hpp"
#include "pve/delaunay.hpp"
#include "pve/predicates.hpp"

namespace pve::geom {

struct Circumcircle {
    Vec2 center;
    double radius;
};

/// Circumcircle of every triangle; the centers are the Voronoi vertices.
inline std::vector<Circumcircle> circumcircles(const Triangulation& tri) {
    std::vector<Circumcircle> out(tri.triangles.size());
    for (size_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& v = tri.triangles[t];
        const Vec2 c = circumcenter(tri.points[v[0]], tri.points[v[1]], tri.points[v[2]]);
        out[t] = {c, dist(c, tri.points[v[0]])};
    }
    return out;
}

/// Voronoi cell of one generator: its vertices in counterclockwise cyclic
/// order (circumcenters of the incident Delaunay triangles), the generator
/// indices of the adjacent cells, and the interior validity flag.
struct VoronoiCell {
    int32_t generator = -1;
    std::vector<Vec2> vertices;             // deduplicated, cyclic CCW order
    std::vector<int32_t> neighbor_indices;  // adjacent generators (Delaunay ring)
    std::vector<int32_t> incident_triangles;
    bool interior = false;                  // false for hull generators; final
                                            // validity decided by is_interior
};

namespace detail {

// CCW fan walk around an interior generator. Returns false for hull
// generators (the walk meets the hull before closing).
inline bool fan_walk(const Triangulation& tri, int32_t point, int32_t start_tri,
                     std::vector<int32_t>& out) {
    out.clear();
    int32_t t = start_tri;
    for (size_t guard = 0; guard <= tri.triangles.size(); ++guard) {
        out.push_back(t);
        int k = -1;
        for (int j = 0; j < 3; ++j) {
            if (tri.triangles[t][j] == point) k = j;
        }
        if (k < 0) throw GeometryError("voronoi: fan walk lost its pivot");
        const int32_t next = tri.neighbors[t][(k + 1) % 3];  // across edge (point, v[k+2])
        if (next < 0) return false;
        if (next == start_tri) return true;
        t = next;
    }
    throw GeometryError("voronoi: fan walk did not close");
}

}  // namespace detail

inline std::vector<VoronoiCell> voronoi_cells(const Triangulation& tri,
                                              const std::vector<Circumcircle>& circles) {
    const size_t n = tri.points.size();
    std::vector<int32_t> first_tri(n, -1);
    for (size_t t = 0; t < tri.triangles.size(); ++t) {
        for (int j = 0; j < 3; ++j) first_tri[tri.triangles[t][j]] = static_cast<int32_t>(t);
    }

    std::vector<VoronoiCell> cells(n);
    std::vector<int32_t> ring;
    for (size_t i = 0; i < n; ++i) {
        VoronoiCell& cell = cells[i];
        cell.generator = static_cast<int32_t>(i);
        if (tri.hull[i] || first_tri[i] < 0) {
            cell.interior = false;  // unbounded cell
            continue;
        }
        if (!detail::fan_walk(tri, static_cast<int32_t>(i), first_tri[i], ring)) {
            cell.interior = false;
            continue;
        }
        cell.interior = true;
        cell.incident_triangles.assign(ring.begin(), ring.end());
        cell.vertices.reserve(ring.size());
        cell.neighbor_indices.reserve(ring.size());
        for (int32_t t : ring) {
            int k = 0;
            while (tri.triangles[t][k] != static_cast<int32_t>(i)) ++k;
            cell.neighbor_indices.push_back(tri.triangles[t][(k + 1) % 3]);
            const Vec2 c = circles[t].center;
            // collapse duplicate circumcenters of cocircular fans
            if (!cell.vertices.empty()) {
                const Vec2& prev = cell.vertices.back();
                const double tol = 1e-12 * (1.0 + std::fabs(c.x) + std::fabs(c.y));
                if (std::fabs(prev.x - c.x) <= tol && std::fabs(prev.y - c.y) <= tol) continue;
            }
            cell.vertices.push_back(c);
        }
        if (cell.vertices.size() > 1) {
            const Vec2& first = cell.vertices.front();
            const Vec2& last = cell.vertices.back();
            const double tol = 1e-12 * (1.0 + std::fabs(first.x) + std::fabs(first.y));
            if (std::fabs(first.x - last.x) <= tol && std::fabs(first.y - last.y) <= tol) {
                cell.vertices.pop_back();
            }
        }
    }
    return cells;
}

inline std::vector<VoronoiCell> voronoi_cells(const Triangulation& tri) {
    return voronoi_cells(tri, circumcircles(tri));
}

/// Interior test: the generator is not on the convex hull and the circumdisk
/// of every incident Delaunay triangle lies inside [0, side]^2. Such a cell
/// would be identical in the triangulation of any superset of points
/// extending beyond the window.
inline bool is_interior(const VoronoiCell& cell, const Triangulation& tri,
                        const std::vector<Circumcircle>& circles, double side) {
    if (tri.hull[cell.generator]) return false;
    if (!cell.interior) return false;
    for (int32_t t : cell.incident_triangles) {
        const auto& [c, r] = circles[t];
        if (c.x - r < 0.0 || c.x + r > side || c.y - r < 0.0 || c.y + r > side) return false;
    }
    return true;
}

inline bool is_interior(const VoronoiCell& cell, const Triangulation& tri, double side) {
    return is_interior(cell, tri, circumcircles(tri), side);
}

/// Debug dump of one window's tessellation: points, triangles, and cell
/// vertex lists as three CSV sections.
inline void dump_tessellation_csv(const Triangulation& tri, const std::vector<VoronoiCell>& cells,
                                  std::ostream& os) {
    os << "section,index,data\n";
    char buf[128];
    for (size_t i = 0; i < tri.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "point,%zu,%.17g;%.17g\n", i, tri.points[i].x,
                      tri.points[i].y);
        os << buf;
    }
    for (size_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& v = tri.triangles[t];
        std::snprintf(buf, sizeof(buf), "triangle,%zu,%d;%d;%d\n", t, v[0], v[1], v[2]);
        os << buf;
    }
    for (size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].interior) continue;
        os << "cell," << i << ",";
        for (size_t j = 0; j < cells[i].vertices.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%s%.17g;%.17g", j ? "|" : "", cells[i].vertices[j].x,
                          cells[i].vertices[j].y);
            os << buf;
        }
        os << "\n";
    }
}

}  // namespace pve::geom
