#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "pve/common.hpp"
#include "pve/dual.hpp"
#include "pve/rng.hpp"
#include "pve/special.hpp"

// The five candidate families and the closed-form theory CDFs.
//
// Parameterizations (fixed; fit reports use these names):
//   GeneralizedGamma(a, b, c): F(x) = P(c/a, b x^a),  a, b, c > 0
//   Gamma(shape k, rate beta): F(x) = P(k, beta x)
//   LogNormal(mu, sigma):      F(x) = Phi((ln x - mu) / sigma)
//   Rayleigh(sigma):           F(x) = 1 - exp(-x^2 / (2 sigma^2))
//   Weibull(shape k, scale l): F(x) = 1 - exp(-(x/l)^k)

namespace pve {

struct GGParams {
    double a = 1.0;  // power
    double b = 1.0;  // rate
    double c = 1.0;  // shape

    void validate() const {
        if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
            !std::isfinite(c)) {
            throw std::domain_error("GGParams: a, b, c must be positive and finite");
        }
    }
};

enum class Family { generalized_gamma, gamma, log_normal, rayleigh, weibull };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::generalized_gamma: return "generalized_gamma";
        case Family::gamma: return "gamma";
        case Family::log_normal: return "log_normal";
        case Family::rayleigh: return "rayleigh";
        case Family::weibull: return "weibull";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    if (s == "generalized_gamma" || s == "gg" || s == "gengamma") return Family::generalized_gamma;
    if (s == "gamma") return Family::gamma;
    if (s == "log_normal" || s == "lognormal") return Family::log_normal;
    if (s == "rayleigh") return Family::rayleigh;
    if (s == "weibull") return Family::weibull;
    throw UsageError("unknown family '" + s +
                     "'; valid: generalized_gamma, gamma, log_normal, rayleigh, weibull");
}

constexpr size_t family_dim(Family f) {
    switch (f) {
        case Family::generalized_gamma: return 3;
        case Family::rayleigh: return 1;
        default: return 2;
    }
}

/// Tagged union over the five families; `p` holds family_dim(family) values
/// in the documented order.
struct FamilyParams {
    Family family = Family::generalized_gamma;
    std::array<double, 3> p{1.0, 1.0, 1.0};

    static FamilyParams gg(GGParams g) { return {Family::generalized_gamma, {g.a, g.b, g.c}}; }
    static FamilyParams gamma(double shape, double rate) { return {Family::gamma, {shape, rate, 0}}; }
    static FamilyParams log_normal(double mu, double sigma) { return {Family::log_normal, {mu, sigma, 0}}; }
    static FamilyParams rayleigh(double sigma) { return {Family::rayleigh, {sigma, 0, 0}}; }
    static FamilyParams weibull(double shape, double scale) { return {Family::weibull, {shape, scale, 0}}; }

    GGParams as_gg() const { return {p[0], p[1], p[2]}; }

    void validate() const {
        const size_t d = family_dim(family);
        for (size_t i = 0; i < d; ++i) {
            if (!std::isfinite(p[i])) throw std::domain_error("FamilyParams: non-finite parameter");
            // LogNormal mu may be any real; everything else must be positive.
            if (!(family == Family::log_normal && i == 0) && !(p[i] > 0.0)) {
                throw std::domain_error("FamilyParams: parameters must be > 0");
            }
        }
    }
};

// ---- Generalized Gamma ----------------------------------------------------

/// CDF of the Generalized Gamma at x >= 0. The integral form reduces to the
/// regularized lower incomplete gamma by t -> (u/b)^(1/a); tests verify the
/// reduction against direct quadrature.
template <class T>
T gg_cdf_t(double x, const T& a, const T& b, const T& c) {
    if (x < 0.0) throw std::domain_error("gg_cdf: x must be >= 0");
    if (x == 0.0) return T(0.0);
    return reg_lower_gamma(c / a, b * pow(T(x), a));
}

template <class T>
T gg_survival_t(double x, const T& a, const T& b, const T& c) {
    if (x < 0.0) throw std::domain_error("gg_cdf: x must be >= 0");
    if (x == 0.0) return T(1.0);
    return reg_upper_gamma(c / a, b * pow(T(x), a));
}

inline double gg_cdf(double x, const GGParams& p) {
    p.validate();
    return gg_cdf_t(x, p.a, p.b, p.c);
}

template <class T>
T gg_logpdf_t(double x, const T& a, const T& b, const T& c) {
    if (!(x > 0.0)) throw std::domain_error("gg_logpdf: x must be > 0");
    const T s = c / a;
    return log(a) + s * log(b) - detail::lgamma_t(s) + (c - T(1.0)) * std::log(x) -
           b * pow(T(x), a);
}

inline double gg_logpdf(double x, const GGParams& p) {
    p.validate();
    return gg_logpdf_t(x, p.a, p.b, p.c);
}

/// Draw from the Generalized Gamma: U ~ Gamma(c/a, 1), return (U/b)^(1/a).
inline double gg_sample(const GGParams& p, Rng& rng) {
    p.validate();
    const double u = rng.gamma(p.c / p.a);
    return std::pow(u / p.b, 1.0 / p.a);
}

/// m-th raw moment: Gamma((c+m)/a) / (b^{m/a} Gamma(c/a)).
inline double gg_moment(double m, const GGParams& p) {
    p.validate();
    if (!(m >= 0.0)) throw std::domain_error("gg_moment: order must be >= 0");
    return std::exp(log_gamma((p.c + m) / p.a) - log_gamma(p.c / p.a) -
                    (m / p.a) * std::log(p.b));
}

// ---- All families, templated for autodiff through the fitting module ------

template <class T>
T family_cdf_t(Family f, double x, const T* q) {
    if (x < 0.0) throw std::domain_error("family_cdf: x must be >= 0");
    if (x == 0.0) return T(0.0);
    switch (f) {
        case Family::generalized_gamma: return gg_cdf_t(x, q[0], q[1], q[2]);
        case Family::gamma: return reg_lower_gamma(q[0], q[1] * T(x));
        case Family::log_normal: {
            constexpr double inv_sqrt2 = 0.7071067811865475244;
            const T z = (T(std::log(x)) - q[0]) / q[1];
            return T(0.5) * erfc(-z * T(inv_sqrt2));
        }
        case Family::rayleigh: {
            const T z = T(x) / q[0];
            return -expm1(T(-0.5) * z * z);
        }
        case Family::weibull: return -expm1(-pow(T(x) / q[1], q[0]));
    }
    throw std::logic_error("family_cdf: unreachable");
}

template <class T>
T family_survival_t(Family f, double x, const T* q) {
    if (x < 0.0) throw std::domain_error("family_survival: x must be >= 0");
    if (x == 0.0) return T(1.0);
    switch (f) {
        case Family::generalized_gamma: return gg_survival_t(x, q[0], q[1], q[2]);
        case Family::gamma: return reg_upper_gamma(q[0], q[1] * T(x));
        case Family::log_normal: {
            constexpr double inv_sqrt2 = 0.7071067811865475244;
            const T z = (T(std::log(x)) - q[0]) / q[1];
            return T(0.5) * erfc(z * T(inv_sqrt2));
        }
        case Family::rayleigh: {
            const T z = T(x) / q[0];
            return exp(T(-0.5) * z * z);
        }
        case Family::weibull: return exp(-pow(T(x) / q[1], q[0]));
    }
    throw std::logic_error("family_survival: unreachable");
}

template <class T>
T family_logpdf_t(Family f, double x, const T* q) {
    if (!(x > 0.0)) throw std::domain_error("family_logpdf: x must be > 0");
    constexpr double half_log_two_pi = 0.91893853320467274178;
    switch (f) {
        case Family::generalized_gamma: return gg_logpdf_t(x, q[0], q[1], q[2]);
        case Family::gamma:
            return q[0] * log(q[1]) - detail::lgamma_t(q[0]) + (q[0] - T(1.0)) * std::log(x) -
                   q[1] * T(x);
        case Family::log_normal: {
            const T z = (T(std::log(x)) - q[0]) / q[1];
            return -log(q[1]) - T(std::log(x)) - T(half_log_two_pi) - T(0.5) * z * z;
        }
        case Family::rayleigh: {
            const T z = T(x) / q[0];
            return T(std::log(x)) - T(2.0) * log(q[0]) - T(0.5) * z * z;
        }
        case Family::weibull: {
            const T z = T(x) / q[1];
            return log(q[0]) - log(q[1]) + (q[0] - T(1.0)) * log(z) - pow(z, q[0]);
        }
    }
    throw std::logic_error("family_logpdf: unreachable");
}

inline double family_cdf(double x, const FamilyParams& fp) {
    fp.validate();
    return family_cdf_t(fp.family, x, fp.p.data());
}

inline double family_logpdf(double x, const FamilyParams& fp) {
    fp.validate();
    return family_logpdf_t(fp.family, x, fp.p.data());
}

// ---- Closed-form theory CDFs ----------------------------------------------

enum class TheoryCdf { edge1d, max1d, min1d, vertex2d };

inline TheoryCdf theory_from_name(const std::string& s) {
    if (s == "edge1d") return TheoryCdf::edge1d;
    if (s == "max1d") return TheoryCdf::max1d;
    if (s == "min1d") return TheoryCdf::min1d;
    if (s == "vertex2d") return TheoryCdf::vertex2d;
    throw UsageError("unknown theory cdf '" + s + "'; valid: edge1d, max1d, min1d, vertex2d");
}

/// edge1d:   1 - e^{-2d}         (normalized seed-to-edge distance on a line)
/// max1d:    (1 - e^{-2d})^2     (larger of the two edge distances)
/// min1d:    1 - e^{-4d}         (smaller of the two edge distances)
/// vertex2d: 1 - (1 + pi r^2) e^{-pi r^2}   (normalized seed-to-vertex distance)
inline double theory_cdf(TheoryCdf which, double x) {
    if (!(x >= 0.0)) throw std::domain_error("theory_cdf: x must be >= 0");
    constexpr double pi = 3.14159265358979323846;
    switch (which) {
        case TheoryCdf::edge1d: return -std::expm1(-2.0 * x);
        case TheoryCdf::max1d: {
            const double f = -std::expm1(-2.0 * x);
            return f * f;
        }
        case TheoryCdf::min1d: return -std::expm1(-4.0 * x);
        case TheoryCdf::vertex2d: {
            const double u = pi * x * x;
            return 1.0 - (1.0 + u) * std::exp(-u);
        }
    }
    throw std::logic_error("theory_cdf: unreachable");
}

/// Map a CDF of the normalized quantity to physical units at intensity
/// lambda: F_X(x) = F_normalized(x * sqrt(lambda)).
inline std::function<double(double)> rescale_cdf(std::function<double(double)> f, double lambda) {
    if (!(lambda > 0.0)) throw std::domain_error("rescale_cdf: lambda must be > 0");
    const double root = std::sqrt(lambda);
    return [f = std::move(f), root](double x) { return f(x * root); };
}

}  // namespace pve
