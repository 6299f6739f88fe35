#pragma once

#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "pve/common.hpp"

// Orientation and in-circle predicates: fast floating-point evaluation with
// Shewchuk-style forward error bounds, exact rational fallback when the
// filter cannot certify the sign. Inputs are doubles, so the rational
// evaluation is exact.

namespace pve::geom {

using Rational = boost::multiprecision::cpp_rational;

namespace detail {

constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
constexpr double kCcwErrBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIccErrBound = (10.0 + 96.0 * kEps) * kEps;

inline int orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
    const Rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    const Rational det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
    return det == 0 ? 0 : (det > 0 ? 1 : -1);
}

inline int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const Rational adx = Rational(a.x) - Rational(d.x), ady = Rational(a.y) - Rational(d.y);
    const Rational bdx = Rational(b.x) - Rational(d.x), bdy = Rational(b.y) - Rational(d.y);
    const Rational cdx = Rational(c.x) - Rational(d.x), cdy = Rational(c.y) - Rational(d.y);
    const Rational det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) +
                         (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy) +
                         (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    return det == 0 ? 0 : (det > 0 ? 1 : -1);
}

}  // namespace detail

/// Sign of the signed area of (a, b, c): +1 counterclockwise, -1 clockwise,
/// 0 exactly collinear.
inline int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    double detsum;
    if (detleft > 0.0) {
        if (detright <= 0.0) return det > 0 ? 1 : (det < 0 ? -1 : 0);
        detsum = detleft + detright;
    } else if (detleft < 0.0) {
        if (detright >= 0.0) return det > 0 ? 1 : (det < 0 ? -1 : 0);
        detsum = -detleft - detright;
    } else {
        return det > 0 ? 1 : (det < 0 ? -1 : 0);
    }
    const double errbound = detail::kCcwErrBound * detsum;
    if (det >= errbound) return 1;
    if (-det >= errbound) return -1;
    return detail::orient2d_exact(a, b, c);
}

/// Sign of the in-circle determinant for d against the circumcircle of the
/// counterclockwise triangle (a, b, c): +1 strictly inside, 0 on the circle,
/// -1 strictly outside.
inline int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double alift = adx * adx + ady * ady;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double blift = bdx * bdx + bdy * bdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                       clift * (adxbdy - bdxady);
    const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                             (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                             (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
    const double errbound = detail::kIccErrBound * permanent;
    if (det > errbound) return 1;
    if (-det > errbound) return -1;
    return detail::incircle_exact(a, b, c, d);
}

/// Circumcenter of a non-degenerate triangle, computed in extended precision.
/// The returned point is equidistant to the three vertices to ~1e-15 relative.
inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
    const long double bx = static_cast<long double>(b.x) - a.x;
    const long double by = static_cast<long double>(b.y) - a.y;
    const long double cx = static_cast<long double>(c.x) - a.x;
    const long double cy = static_cast<long double>(c.y) - a.y;
    const long double d = 2.0L * (bx * cy - by * cx);
    if (d == 0.0L) {
        throw GeometryError("circumcenter: degenerate (collinear) triangle");
    }
    const long double bl = bx * bx + by * by;
    const long double cl = cx * cx + cy * cy;
    const long double ux = (cy * bl - by * cl) / d;
    const long double uy = (bx * cl - cx * bl) / d;
    return {static_cast<double>(ux + a.x), static_cast<double>(uy + a.y)};
}

}  // namespace pve::geom
