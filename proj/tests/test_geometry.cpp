#include "pve/delaunay.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pve/predicates.hpp"
#include "pve/rng.hpp"

using namespace pve;
using namespace pve::geom;

namespace {

std::vector<Vec2> random_points(size_t n, uint64_t seed, double side = 1.0) {
    Rng rng(seed, 0);
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = {rng.uniform(0.0, side), rng.uniform(0.0, side)};
    return pts;
}

// O(n * t) empty-circumcircle check with the library predicate (exact).
void expect_delaunay(const Triangulation& tri) {
    for (const auto& t : tri.triangles) {
        const Vec2 &a = tri.points[t[0]], &b = tri.points[t[1]], &c = tri.points[t[2]];
        ASSERT_GT(orient2d(a, b, c), 0);
        for (size_t p = 0; p < tri.points.size(); ++p) {
            if (static_cast<int32_t>(p) == t[0] || static_cast<int32_t>(p) == t[1] ||
                static_cast<int32_t>(p) == t[2]) {
                continue;
            }
            ASSERT_LE(incircle(a, b, c, tri.points[p]), 0)
                << "point " << p << " strictly inside a circumdisk";
        }
    }
}

void expect_euler(const Triangulation& tri) {
    const size_t n = tri.points.size();
    const size_t h = tri.num_hull_points();
    EXPECT_EQ(tri.triangles.size(), 2 * n - 2 - h);
    // neighbor map symmetry
    for (size_t t = 0; t < tri.triangles.size(); ++t) {
        for (int j = 0; j < 3; ++j) {
            const int32_t u = tri.neighbors[t][j];
            if (u < 0) continue;
            bool found = false;
            for (int k = 0; k < 3; ++k) {
                found |= tri.neighbors[u][k] == static_cast<int32_t>(t);
            }
            EXPECT_TRUE(found);
        }
    }
}

}  // namespace

TEST(Predicates, OrientationSigns) {
    EXPECT_GT(orient2d({0, 0}, {1, 0}, {0, 1}), 0);
    EXPECT_LT(orient2d({0, 0}, {0, 1}, {1, 0}), 0);
    EXPECT_EQ(orient2d({0, 0}, {1, 1}, {2, 2}), 0);
    // near-degenerate case resolved exactly
    const double eps = std::ldexp(1.0, -52);
    EXPECT_EQ(orient2d({0, 0}, {1, 1}, {2 + 2 * eps, 2 + 2 * eps}), 0);
}

TEST(Predicates, InCircleSigns) {
    const Vec2 a{0, 0}, b{1, 0}, c{0, 1};
    EXPECT_GT(incircle(a, b, c, {0.3, 0.3}), 0);
    EXPECT_LT(incircle(a, b, c, {2.0, 2.0}), 0);
    EXPECT_EQ(incircle(a, b, c, {1.0, 1.0}), 0);  // cocircular corner
}

TEST(Circumcenter, RightTriangle) {
    const Vec2 cc = circumcenter({0, 0}, {1, 0}, {0, 1});
    EXPECT_DOUBLE_EQ(cc.x, 0.5);
    EXPECT_DOUBLE_EQ(cc.y, 0.5);
}

TEST(Circumcenter, Equilateral) {
    const Vec2 cc = circumcenter({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0});
    EXPECT_NEAR(cc.x, 0.5, 1e-15);
    EXPECT_NEAR(cc.y, std::sqrt(3.0) / 6.0, 1e-15);
}

TEST(Circumcenter, DegenerateThrows) {
    EXPECT_THROW(circumcenter({0, 0}, {1, 1}, {2, 2}), GeometryError);
}

TEST(Circumcenter, EquidistanceOnRandomTriangles) {
    Rng rng(71, 0);
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i) {
        const Vec2 a{rng.uniform(), rng.uniform()};
        const Vec2 b{rng.uniform(), rng.uniform()};
        const Vec2 c{rng.uniform(), rng.uniform()};
        if (orient2d(a, b, c) == 0) continue;
        const Vec2 cc = circumcenter(a, b, c);
        const double ra = dist(cc, a), rb = dist(cc, b), rc = dist(cc, c);
        const double r = std::max({ra, rb, rc});
        worst = std::max(worst, std::max(std::fabs(ra - rb), std::fabs(ra - rc)) / r);
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(Triangulate, MinimalTriangle) {
    const auto tri = triangulate(std::vector<Vec2>{{0, 0}, {2, 0}, {1, 1.5}});
    EXPECT_EQ(tri.triangles.size(), 1u);
    EXPECT_EQ(tri.num_hull_points(), 3u);
}

TEST(Triangulate, DegenerateInputs) {
    EXPECT_THROW(triangulate(std::vector<Vec2>{{0, 0}, {1, 0}}), GeometryError);
    EXPECT_THROW(triangulate(std::vector<Vec2>{{0, 0}, {1, 0}, {2, 0}, {5, 0}}), GeometryError);
    EXPECT_THROW(triangulate(std::vector<Vec2>{{0, 0}, {1, 0}, {1, 0}, {0.5, 1}}), GeometryError);
}

TEST(Triangulate, UnitSquareUsesLowestIndexDiagonal) {
    // both diagonals are Delaunay (cocircular); the tie rule picks {0, 2}
    const auto tri = triangulate(std::vector<Vec2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    ASSERT_EQ(tri.triangles.size(), 2u);
    std::set<std::pair<int, int>> edges;
    for (const auto& t : tri.triangles) {
        for (int j = 0; j < 3; ++j) {
            const int u = t[j], v = t[(j + 1) % 3];
            edges.insert({std::min(u, v), std::max(u, v)});
        }
    }
    EXPECT_TRUE(edges.count({0, 2}));
    EXPECT_FALSE(edges.count({1, 3}));
}

TEST(Triangulate, SquareDiagonalRuleIsLabelInvariant) {
    // relabeled square: the preferred diagonal follows indices, not geometry
    const auto tri = triangulate(std::vector<Vec2>{{1, 0}, {0, 0}, {0, 1}, {1, 1}});
    std::set<std::pair<int, int>> edges;
    for (const auto& t : tri.triangles) {
        for (int j = 0; j < 3; ++j) {
            const int u = t[j], v = t[(j + 1) % 3];
            edges.insert({std::min(u, v), std::max(u, v)});
        }
    }
    EXPECT_TRUE(edges.count({0, 2}));  // (1,0)-(0,1) is now the 0-2 diagonal
    EXPECT_FALSE(edges.count({1, 3}));
}

TEST(Triangulate, RandomPointsSatisfyEmptyCircumcircle) {
    const auto pts = random_points(200, 2024);
    const auto tri = triangulate(pts);
    expect_delaunay(tri);
    expect_euler(tri);
}

TEST(Triangulate, ManyRandomInstances) {
    Rng sizes(555, 0);
    for (int rep = 0; rep < 60; ++rep) {
        const size_t n = 4 + static_cast<size_t>(sizes.uniform() * 60);
        const auto pts = random_points(n, 1000 + rep);
        const auto tri = triangulate(pts);
        expect_delaunay(tri);
        expect_euler(tri);
    }
}

TEST(Triangulate, CollinearChainsOnTheHull) {
    // grid points put collinear chains on the hull; insertion order stresses
    // the on-edge and beyond-edge paths
    std::vector<Vec2> pts;
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
    const auto tri = triangulate(pts);
    expect_delaunay(tri);
    const size_t n = pts.size();
    const size_t h = tri.num_hull_points();
    EXPECT_EQ(h, 12u);
    EXPECT_EQ(tri.triangles.size(), 2 * n - 2 - h);
}

TEST(Triangulate, LargeCocircularGrids) {
    // every unit square (and many larger subsets) is exactly cocircular;
    // exercises the exact predicates and the canonical flip pass at scale
    for (int side : {10, 16}) {
        std::vector<Vec2> pts;
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                pts.push_back({static_cast<double>(x), static_cast<double>(y)});
            }
        }
        const auto tri = triangulate(pts);
        const size_t n = pts.size();
        const size_t h = tri.num_hull_points();
        EXPECT_EQ(h, static_cast<size_t>(4 * (side - 1)));
        EXPECT_EQ(tri.triangles.size(), 2 * n - 2 - h);
        if (side == 10) expect_delaunay(tri);
    }
}

TEST(Triangulate, LatticeSnappedPoints) {
    // distinct points on a coarse lattice: heavy cocircularity and collinearity
    Rng rng(2662, 0);
    std::set<std::pair<int, int>> cells;
    while (cells.size() < 250) {
        cells.insert({static_cast<int>(rng.uniform() * 30), static_cast<int>(rng.uniform() * 30)});
    }
    std::vector<Vec2> pts;
    for (const auto& [x, y] : cells) {
        pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
    const auto tri = triangulate(pts);
    expect_delaunay(tri);
    expect_euler(tri);
}

TEST(Triangulate, DeterministicForFixedInput) {
    const auto pts = random_points(500, 31337);
    const auto t1 = triangulate(pts);
    const auto t2 = triangulate(pts);
    ASSERT_EQ(t1.triangles.size(), t2.triangles.size());
    for (size_t i = 0; i < t1.triangles.size(); ++i) EXPECT_EQ(t1.triangles[i], t2.triangles[i]);
}

TEST(Triangulate, LargeInstanceEulerIdentity) {
    const auto pts = random_points(20'000, 8);
    const auto tri = triangulate(pts);
    expect_euler(tri);
}
