#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace pve {

/// Forward-mode dual number carrying a value and N partial derivatives.
/// Used to differentiate likelihoods (including the incomplete-gamma kernel)
/// exactly, instead of hand-deriving each family's gradient. Operators are
/// hidden friends so doubles convert implicitly in mixed expressions.
template <std::size_t N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) { d.fill(0.0); }  // NOLINT: implicit by design
    Dual(double value, std::size_t seed_index) : v(value) {
        d.fill(0.0);
        d[seed_index] = 1.0;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }

    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
    friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
    friend Dual operator-(Dual a) {
        a.v = -a.v;
        for (auto& g : a.d) g = -g;
        return a;
    }
    friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
    friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
    friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
    friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
};

template <std::size_t N>
Dual<N> chain(double value, double deriv, const Dual<N>& x) {
    Dual<N> r;
    r.v = value;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = deriv * x.d[i];
    return r;
}

template <std::size_t N> Dual<N> exp(const Dual<N>& x) {
    const double e = std::exp(x.v);
    return chain(e, e, x);
}
template <std::size_t N> Dual<N> log(const Dual<N>& x) {
    return chain(std::log(x.v), 1.0 / x.v, x);
}
template <std::size_t N> Dual<N> sqrt(const Dual<N>& x) {
    const double s = std::sqrt(x.v);
    return chain(s, 0.5 / s, x);
}
template <std::size_t N> Dual<N> expm1(const Dual<N>& x) {
    return chain(std::expm1(x.v), std::exp(x.v), x);
}
template <std::size_t N> Dual<N> erf(const Dual<N>& x) {
    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    return chain(std::erf(x.v), two_over_sqrt_pi * std::exp(-x.v * x.v), x);
}
template <std::size_t N> Dual<N> erfc(const Dual<N>& x) {
    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    return chain(std::erfc(x.v), -two_over_sqrt_pi * std::exp(-x.v * x.v), x);
}
template <std::size_t N> Dual<N> fabs(const Dual<N>& x) {
    return x.v < 0.0 ? -x : x;
}
template <std::size_t N> Dual<N> pow(const Dual<N>& b, const Dual<N>& e) {
    // b > 0 assumed (all uses are positive-parameter powers)
    return exp(e * log(b));
}
template <std::size_t N> Dual<N> pow(const Dual<N>& x, double p) {
    return chain(std::pow(x.v, p), p * std::pow(x.v, p - 1.0), x);
}

// Double passthroughs so templated code written with unqualified calls works
// for T = double inside namespace pve.
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double expm1(double x) { return std::expm1(x); }
inline double erf(double x) { return std::erf(x); }
inline double erfc(double x) { return std::erfc(x); }
inline double fabs(double x) { return std::fabs(x); }
inline double pow(double b, double e) { return std::pow(b, e); }

inline double value_of(double x) { return x; }
template <std::size_t N> double value_of(const Dual<N>& x) { return x.v; }

}  // namespace pve
