#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pve/common.hpp"
#include "pve/predicates.hpp"

namespace pve::geom {

/// Planar Delaunay triangulation. Triangles are counterclockwise;
/// neighbors[t][j] is the triangle across the edge opposite triangles[t][j],
/// or -1 on the convex hull. Cocircular ties are canonicalized so that the
/// diagonal with the lexicographically smallest (sorted) index pair is kept;
/// with that rule the result depends only on the point set.
struct Triangulation {
    std::vector<Vec2> points;
    std::vector<std::array<int32_t, 3>> triangles;
    std::vector<std::array<int32_t, 3>> neighbors;
    std::vector<uint8_t> hull;  // per point: 1 if on the convex hull

    size_t num_hull_points() const {
        size_t h = 0;
        for (uint8_t f : hull) h += f;
        return h;
    }
};

namespace detail {

constexpr int32_t kGhost = -1;

inline uint32_t hilbert_d2_key(uint32_t x, uint32_t y) {
    // 16-bit x/y -> 32-bit Hilbert index
    uint32_t rx, ry, d = 0;
    for (uint32_t s = 1u << 15; s > 0; s >>= 1) {
        rx = (x & s) > 0 ? 1 : 0;
        ry = (y & s) > 0 ? 1 : 0;
        d += s * s * ((3 * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = 65535 - x;
                y = 65535 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

class Builder {
  public:
    explicit Builder(std::span<const Vec2> pts) : pts_(pts) {}

    Triangulation build() {
        const size_t n = pts_.size();
        if (n < 3) throw GeometryError("triangulate: need at least 3 points");
        std::vector<uint32_t> order = insertion_order();

        // Seed with the first non-degenerate triple in insertion order.
        const uint32_t i0 = order[0];
        size_t j1 = 1;
        while (j1 < n && pts_[order[j1]].x == pts_[i0].x && pts_[order[j1]].y == pts_[i0].y) ++j1;
        if (j1 >= n) throw GeometryError("triangulate: all points coincide");
        const uint32_t i1 = order[j1];
        size_t j2 = j1 + 1;
        int s = 0;
        while (j2 < n && (s = orient2d(pts_[i0], pts_[i1], pts_[order[j2]])) == 0) ++j2;
        if (j2 >= n) throw GeometryError("triangulate: all points collinear");
        uint32_t a = i1, b = order[j2];
        if (s < 0) std::swap(a, b);
        make_seed(static_cast<int32_t>(i0), static_cast<int32_t>(a), static_cast<int32_t>(b));

        std::vector<uint8_t> done(n, 0);
        done[i0] = done[a] = done[b] = 1;
        for (uint32_t idx : order) {
            if (!done[idx]) {
                insert(static_cast<int32_t>(idx));
                done[idx] = 1;
            }
        }
        canonicalize_cocircular();
        return finish();
    }

  private:
    struct Tri {
        std::array<int32_t, 3> v;  // ghost vertex, if any, always in slot 2
        std::array<int32_t, 3> n;  // neighbor opposite v[j]
    };

    std::span<const Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<uint8_t> alive_;
    std::vector<uint32_t> mark_in_, mark_out_;
    std::vector<int32_t> free_;
    uint32_t epoch_ = 0;
    int32_t last_ = 0;

    // scratch buffers reused across insertions
    std::vector<int32_t> cavity_;
    struct BoundaryEdge {
        int32_t a, b;       // directed edge, cavity on the left
        int32_t out;        // triangle outside the cavity across (a, b)
        int out_slot;       // slot in `out` facing the cavity
    };
    std::vector<BoundaryEdge> boundary_;
    struct PendingEdge {
        int32_t from, to;
        int32_t tri;
        int slot;
    };
    std::vector<PendingEdge> pending_;

    bool is_ghost(int32_t t) const { return tris_[t].v[2] == kGhost; }

    std::vector<uint32_t> insertion_order() const {
        const size_t n = pts_.size();
        double xmin = pts_[0].x, xmax = pts_[0].x, ymin = pts_[0].y, ymax = pts_[0].y;
        for (const auto& p : pts_) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        const double sx = xmax > xmin ? 65535.0 / (xmax - xmin) : 0.0;
        const double sy = ymax > ymin ? 65535.0 / (ymax - ymin) : 0.0;
        std::vector<std::pair<uint32_t, uint32_t>> keyed(n);
        for (size_t i = 0; i < n; ++i) {
            const auto gx = static_cast<uint32_t>((pts_[i].x - xmin) * sx);
            const auto gy = static_cast<uint32_t>((pts_[i].y - ymin) * sy);
            keyed[i] = {hilbert_d2_key(gx, gy), static_cast<uint32_t>(i)};
        }
        std::sort(keyed.begin(), keyed.end());
        std::vector<uint32_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = keyed[i].second;
        return order;
    }

    int32_t new_tri(int32_t a, int32_t b, int32_t c) {
        int32_t id;
        if (!free_.empty()) {
            id = free_.back();
            free_.pop_back();
            alive_[id] = 1;
            tris_[id] = Tri{{a, b, c}, {-1, -1, -1}};
        } else {
            id = static_cast<int32_t>(tris_.size());
            tris_.push_back(Tri{{a, b, c}, {-1, -1, -1}});
            alive_.push_back(1);
            mark_in_.push_back(0);
            mark_out_.push_back(0);
        }
        return id;
    }

    void kill(int32_t t) {
        alive_[t] = 0;
        free_.push_back(t);
    }

    int slot_of_neighbor(int32_t t, int32_t other) const {
        for (int j = 0; j < 3; ++j) {
            if (tris_[t].n[j] == other) return j;
        }
        throw GeometryError("triangulate: broken adjacency");
    }

    void make_seed(int32_t a, int32_t b, int32_t c) {
        const int32_t t = new_tri(a, b, c);
        const int32_t gab = new_tri(a, b, kGhost);
        const int32_t gbc = new_tri(b, c, kGhost);
        const int32_t gca = new_tri(c, a, kGhost);
        // finite triangle across each ghost's hull edge (slot 2)
        tris_[t].n = {gbc, gca, gab};
        tris_[gab].n = {gbc, gca, t};
        tris_[gbc].n = {gca, gab, t};
        tris_[gca].n = {gab, gbc, t};
        last_ = t;
    }

    bool conflicts(int32_t t, const Vec2& p) const {
        const Tri& tr = tris_[t];
        if (!is_ghost(t)) {
            return incircle(pts_[tr.v[0]], pts_[tr.v[1]], pts_[tr.v[2]], p) > 0;
        }
        const Vec2& u = pts_[tr.v[0]];
        const Vec2& w = pts_[tr.v[1]];
        const int o = orient2d(u, w, p);
        if (o != 0) return o < 0;
        // collinear with the hull edge: conflict only strictly inside the segment
        if (std::fabs(w.x - u.x) >= std::fabs(w.y - u.y)) {
            const auto [lo, hi] = std::minmax(u.x, w.x);
            return p.x > lo && p.x < hi;
        }
        const auto [lo, hi] = std::minmax(u.y, w.y);
        return p.y > lo && p.y < hi;
    }

    int32_t locate(const Vec2& p) {
        int32_t t = alive_[last_] ? last_ : first_alive();
        if (is_ghost(t)) t = tris_[t].n[2];
        const size_t max_steps = 4 * tris_.size() + 64;
        for (size_t step = 0; step < max_steps; ++step) {
            const Tri& tr = tris_[t];
            check_duplicate(tr, p);
            int32_t next = -2;
            for (int j = 0; j < 3; ++j) {
                const int32_t ea = tr.v[(j + 1) % 3];
                const int32_t eb = tr.v[(j + 2) % 3];
                if (orient2d(pts_[ea], pts_[eb], p) < 0) {
                    next = tr.n[j];
                    break;
                }
            }
            if (next == -2) return t;       // containing triangle
            if (is_ghost(next)) return next;  // p is outside the hull, strictly in this ghost
            t = next;
        }
        return locate_fallback(p);
    }

    void check_duplicate(const Tri& tr, const Vec2& p) const {
        for (int j = 0; j < 3; ++j) {
            if (tr.v[j] == kGhost) continue;
            const Vec2& q = pts_[tr.v[j]];
            if (q.x == p.x && q.y == p.y) {
                throw GeometryError("triangulate: duplicate point");
            }
        }
    }

    int32_t first_alive() const {
        for (size_t t = 0; t < tris_.size(); ++t) {
            if (alive_[t] && !is_ghost(static_cast<int32_t>(t))) return static_cast<int32_t>(t);
        }
        throw GeometryError("triangulate: no alive triangle");
    }

    int32_t locate_fallback(const Vec2& p) {
        for (size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t]) continue;
            const auto tt = static_cast<int32_t>(t);
            if (is_ghost(tt)) continue;
            const Tri& tr = tris_[t];
            check_duplicate(tr, p);
            bool inside = true;
            for (int j = 0; j < 3 && inside; ++j) {
                inside = orient2d(pts_[tr.v[(j + 1) % 3]], pts_[tr.v[(j + 2) % 3]], p) >= 0;
            }
            if (inside) return tt;
        }
        for (size_t t = 0; t < tris_.size(); ++t) {
            if (alive_[t] && is_ghost(static_cast<int32_t>(t)) && conflicts(static_cast<int32_t>(t), p)) {
                return static_cast<int32_t>(t);
            }
        }
        throw GeometryError("triangulate: point location failed");
    }

    void insert(int32_t pi) {
        const Vec2 p = pts_[pi];
        int32_t start = locate(p);
        if (is_ghost(start) && !conflicts(start, p)) {
            // grazing contact (collinear beyond the hull edge): walk the hull
            start = find_conflicting_ghost(start, p);
        }

        // conflict region (Bowyer-Watson cavity)
        ++epoch_;
        cavity_.clear();
        boundary_.clear();
        cavity_.push_back(start);
        mark_in_[start] = epoch_;
        for (size_t qi = 0; qi < cavity_.size(); ++qi) {
            const int32_t t = cavity_[qi];
            const Tri tr = tris_[t];
            const bool t_ghost = tr.v[2] == kGhost;
            for (int j = 0; j < 3; ++j) {
                const int32_t w = tr.n[j];
                if (mark_in_[w] == epoch_) continue;
                int32_t ea = tr.v[(j + 1) % 3];
                int32_t eb = tr.v[(j + 2) % 3];
                // A ghost's finite edge is stored in hull direction (region on
                // the right); flip it so every boundary edge has the cavity on
                // its left.
                if (t_ghost && j == 2) std::swap(ea, eb);
                bool conflict;
                if (mark_out_[w] == epoch_) {
                    conflict = false;
                } else {
                    conflict = conflicts(w, p);
                    if (!conflict) mark_out_[w] = epoch_;
                }
                if (conflict) {
                    mark_in_[w] = epoch_;
                    cavity_.push_back(w);
                } else {
                    boundary_.push_back({ea, eb, w, slot_of_neighbor(w, t)});
                }
            }
        }

        // fan from p over the boundary
        pending_.clear();
        for (const BoundaryEdge& be : boundary_) {
            int32_t t;
            int boundary_slot;
            if (be.b == kGhost) {           // (a, G) -> ghost (p, a, G)
                t = new_tri(pi, be.a, kGhost);
                boundary_slot = 0;
            } else if (be.a == kGhost) {    // (G, b) -> ghost (b, p, G)
                t = new_tri(be.b, pi, kGhost);
                boundary_slot = 1;
            } else {                        // finite (a, b, p)
                t = new_tri(be.a, be.b, pi);
                boundary_slot = 2;
            }
            tris_[t].n[boundary_slot] = be.out;
            tris_[be.out].n[be.out_slot] = t;
            for (int s = 0; s < 3; ++s) {
                if (s == boundary_slot) continue;
                wire_pending(t, s);
            }
            last_ = t;
        }
        for (int32_t t : cavity_) kill(t);
    }

    void wire_pending(int32_t t, int slot) {
        // Matching is on the undirected edge: finite-finite pairs list shared
        // edges in opposite directions, finite-ghost hull pairs in the same.
        int32_t from = tris_[t].v[(slot + 1) % 3];
        int32_t to = tris_[t].v[(slot + 2) % 3];
        if (from > to) std::swap(from, to);
        for (size_t i = 0; i < pending_.size(); ++i) {
            if (pending_[i].from == from && pending_[i].to == to) {
                tris_[t].n[slot] = pending_[i].tri;
                tris_[pending_[i].tri].n[pending_[i].slot] = t;
                pending_[i] = pending_.back();
                pending_.pop_back();
                return;
            }
        }
        pending_.push_back({from, to, t, slot});
    }

    int32_t find_conflicting_ghost(int32_t g, const Vec2& p) const {
        // rotate around the hull in both directions; the hull is a cycle of ghosts
        int32_t fwd = g, bwd = g;
        for (size_t i = 0; i < tris_.size(); ++i) {
            fwd = tris_[fwd].n[0];  // next ghost around the hull
            if (conflicts(fwd, p)) return fwd;
            bwd = tris_[bwd].n[1];
            if (conflicts(bwd, p)) return bwd;
            if (fwd == g || bwd == g) break;
        }
        throw GeometryError("triangulate: no visible hull edge for outside point");
    }

    void canonicalize_cocircular() {
        for (int pass = 0; pass < 64; ++pass) {
            bool changed = false;
            for (size_t ti = 0; ti < tris_.size(); ++ti) {
                const auto t = static_cast<int32_t>(ti);
                if (!alive_[t] || is_ghost(t)) continue;
                for (int j = 0; j < 3; ++j) {
                    const int32_t u = tris_[t].n[j];
                    if (u < t || is_ghost(u) || !alive_[u]) continue;
                    const int32_t c = tris_[t].v[j];
                    const int32_t a = tris_[t].v[(j + 1) % 3];
                    const int32_t b = tris_[t].v[(j + 2) % 3];
                    const int k = slot_of_neighbor(u, t);
                    const int32_t d = tris_[u].v[k];
                    if (incircle(pts_[tris_[t].v[0]], pts_[tris_[t].v[1]], pts_[tris_[t].v[2]],
                                 pts_[d]) == 0 &&
                        std::minmax(c, d) < std::minmax(a, b)) {
                        flip(t, j, u, k);
                        changed = true;
                    }
                }
            }
            if (!changed) return;
        }
        throw GeometryError("triangulate: cocircular canonicalization did not settle");
    }

    // Flip the edge shared by t (slot j) and u (slot k): diagonal (a,b) -> (c,d).
    void flip(int32_t t, int j, int32_t u, int k) {
        const int32_t c = tris_[t].v[j];
        const int32_t a = tris_[t].v[(j + 1) % 3];
        const int32_t b = tris_[t].v[(j + 2) % 3];
        const int32_t d = tris_[u].v[k];
        const int32_t t_bc = tris_[t].n[(j + 1) % 3];
        const int32_t t_ca = tris_[t].n[(j + 2) % 3];
        const int32_t u_ad = tris_[u].n[(k + 1) % 3];
        const int32_t u_db = tris_[u].n[(k + 2) % 3];

        tris_[t] = Tri{{c, a, d}, {u_ad, u, t_ca}};
        tris_[u] = Tri{{d, b, c}, {t_bc, t, u_db}};
        tris_[u_ad].n[slot_of_neighbor(u_ad, u)] = t;
        tris_[t_bc].n[slot_of_neighbor(t_bc, t)] = u;
        // t_ca and u_db already point at t and u respectively
    }

    Triangulation finish() {
        Triangulation out;
        out.points.assign(pts_.begin(), pts_.end());
        out.hull.assign(pts_.size(), 0);
        std::vector<int32_t> remap(tris_.size(), -1);
        for (size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t]) continue;
            if (is_ghost(static_cast<int32_t>(t))) {
                out.hull[tris_[t].v[0]] = 1;
                out.hull[tris_[t].v[1]] = 1;
            } else {
                remap[t] = static_cast<int32_t>(out.triangles.size());
                out.triangles.push_back(tris_[t].v);
            }
        }
        out.neighbors.reserve(out.triangles.size());
        for (size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t] || remap[t] < 0) continue;
            std::array<int32_t, 3> nb{};
            for (int j = 0; j < 3; ++j) {
                const int32_t w = tris_[t].n[j];
                nb[j] = (w >= 0 && alive_[w] && remap[w] >= 0) ? remap[w] : -1;
            }
            out.neighbors.push_back(nb);
        }
        return out;
    }
};

}  // namespace detail

/// Delaunay triangulation of at least 3 non-collinear, pairwise distinct
/// points. Randomized-incremental insertion along a Hilbert curve with a
/// point-location walk; exact predicates; O(n log n) in practice.
inline Triangulation triangulate(std::span<const Vec2> points) {
    return detail::Builder(points).build();
}

inline Triangulation triangulate(const std::vector<Vec2>& points) {
    return triangulate(std::span<const Vec2>(points.data(), points.size()));
}

}  // namespace pve::geom
