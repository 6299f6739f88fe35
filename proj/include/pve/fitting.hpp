#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pve/common.hpp"
#include "pve/distributions.hpp"
#include "pve/dual.hpp"
#include "pve/ecdf.hpp"
#include "pve/special.hpp"

namespace pve {

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool valid = false;
};

struct FitResult {
    Family family = Family::generalized_gamma;
    FamilyParams params;
    double log_likelihood = 0.0;  // total over n samples
    // Covariance of the internal (log-scale, except LogNormal mu) parameters.
    std::array<std::array<double, 3>, 3> covariance{};
    bool covariance_valid = false;
    std::array<ConfidenceInterval, 3> ci_95{};
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double max_abs_variation = std::numeric_limits<double>::quiet_NaN();
    uint64_t n = 0;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = std::numeric_limits<double>::quiet_NaN();
    double aic = 0.0;
    double bic = 0.0;
    std::vector<std::string> warnings;
};

namespace fitdetail {

// Internal parameterization: log for positive parameters, identity for
// LogNormal's location.
inline bool is_log_dim(Family f, size_t i) { return !(f == Family::log_normal && i == 0); }

template <size_t D>
std::array<Dual<D>, 3> natural_params(Family f, const double* theta) {
    std::array<Dual<D>, 3> q;
    for (size_t i = 0; i < family_dim(f); ++i) {
        const Dual<D> t(theta[i], i);
        q[i] = is_log_dim(f, i) ? exp(t) : t;
    }
    return q;
}

inline FamilyParams params_from_theta(Family f, const double* theta) {
    FamilyParams fp;
    fp.family = f;
    for (size_t i = 0; i < family_dim(f); ++i) {
        fp.p[i] = is_log_dim(f, i) ? std::exp(theta[i]) : theta[i];
    }
    return fp;
}

inline std::array<double, 3> theta_from_params(const FamilyParams& fp) {
    std::array<double, 3> theta{};
    for (size_t i = 0; i < family_dim(fp.family); ++i) {
        theta[i] = is_log_dim(fp.family, i) ? std::log(fp.p[i]) : fp.p[i];
    }
    return theta;
}

/// Grouped observations: occupied histogram bins plus the overflow tail.
struct GroupedData {
    std::vector<double> edges;       // sorted unique edges (includes r_cap if overflow)
    std::vector<uint32_t> bin_left;  // index into edges, per occupied bin
    std::vector<uint32_t> bin_right;
    std::vector<double> count;
    double overflow = 0.0;
    uint32_t cap_edge = 0;  // index of r_cap in edges (valid if overflow > 0)
    uint64_t n = 0;
    double mean = 0.0, m2 = 0.0;          // exact stream moments
    double mean_log = 0.0, var_log = 0.0;  // midpoint approximations
};

inline GroupedData group(const EcdfAccumulator& acc) {
    GroupedData g;
    g.n = acc.n();
    const auto [mean, m2] = acc.moments();
    g.mean = mean;
    g.m2 = m2;
    const auto& counts = acc.counts();
    const double w = acc.r_cap() / acc.bins();
    std::vector<double> all_edges;
    double slog = 0.0, slog2 = 0.0, ntot = 0.0;
    for (size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const double left = w * static_cast<double>(j);
        const double right = (j + 1 == counts.size()) ? acc.r_cap() : w * static_cast<double>(j + 1);
        all_edges.push_back(left);
        all_edges.push_back(right);
        g.count.push_back(static_cast<double>(counts[j]));
        const double mid = 0.5 * (left + right);
        const double c = static_cast<double>(counts[j]);
        const double lm = std::log(std::max(mid, 1e-300));
        slog += c * lm;
        slog2 += c * lm * lm;
        ntot += c;
    }
    if (acc.overflow() > 0) all_edges.push_back(acc.r_cap());
    std::sort(all_edges.begin(), all_edges.end());
    all_edges.erase(std::unique(all_edges.begin(), all_edges.end()), all_edges.end());
    g.edges = std::move(all_edges);
    auto edge_index = [&g](double e) {
        return static_cast<uint32_t>(
            std::lower_bound(g.edges.begin(), g.edges.end(), e) - g.edges.begin());
    };
    for (size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const double left = w * static_cast<double>(j);
        const double right = (j + 1 == counts.size()) ? acc.r_cap() : w * static_cast<double>(j + 1);
        g.bin_left.push_back(edge_index(left));
        g.bin_right.push_back(edge_index(right));
    }
    g.overflow = static_cast<double>(acc.overflow());
    if (acc.overflow() > 0) g.cap_edge = edge_index(acc.r_cap());
    if (ntot > 0.0) {
        g.mean_log = slog / ntot;
        g.var_log = std::max(slog2 / ntot - g.mean_log * g.mean_log, 0.0);
    }
    return g;
}

/// Mean negative log-likelihood of grouped data with exact gradient (duals).
/// Bin probabilities use CDF differences below the median and survival
/// differences above, so far-tail bins do not cancel catastrophically.
template <size_t D>
double grouped_nll(Family fam, const GroupedData& g, const double* theta, double* grad) {
    const auto q = natural_params<D>(fam, theta);
    const size_t nedges = g.edges.size();
    std::vector<Dual<D>> val(nedges);    // F below the split, S above
    std::vector<uint8_t> is_surv(nedges);
    for (size_t e = 0; e < nedges; ++e) {
        const Dual<D> F = family_cdf_t(fam, g.edges[e], q.data());
        if (F.v < 0.5) {
            val[e] = F;
            is_surv[e] = 0;
        } else {
            val[e] = family_survival_t(fam, g.edges[e], q.data());
            is_surv[e] = 1;
        }
    }
    Dual<D> nll(0.0);
    for (size_t j = 0; j < g.count.size(); ++j) {
        const uint32_t l = g.bin_left[j], r = g.bin_right[j];
        Dual<D> p;
        if (!is_surv[l] && !is_surv[r]) {
            p = val[r] - val[l];
        } else if (is_surv[l] && is_surv[r]) {
            p = val[l] - val[r];
        } else {
            p = Dual<D>(1.0) - val[r] - val[l];  // straddles the median
        }
        if (!(p.v > 0.0)) p.v = 1e-300;
        nll -= Dual<D>(g.count[j]) * log(p);
    }
    if (g.overflow > 0.0) {
        Dual<D> s = is_surv[g.cap_edge] ? val[g.cap_edge] : Dual<D>(1.0) - val[g.cap_edge];
        if (!(s.v > 0.0)) s.v = 1e-300;
        nll -= Dual<D>(g.overflow) * log(s);
    }
    const double inv_n = 1.0 / static_cast<double>(g.n);
    if (grad) {
        for (size_t i = 0; i < D; ++i) grad[i] = nll.d[i] * inv_n;
    }
    return nll.v * inv_n;
}

/// Mean negative log-likelihood of raw samples with exact gradient.
template <size_t D>
double raw_nll(Family fam, std::span<const double> xs, const double* theta, double* grad) {
    const auto q = natural_params<D>(fam, theta);
    Dual<D> nll(0.0);
    for (const double x : xs) nll -= family_logpdf_t(fam, x, q.data());
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    if (grad) {
        for (size_t i = 0; i < D; ++i) grad[i] = nll.d[i] * inv_n;
    }
    return nll.v * inv_n;
}

using Objective = std::function<double(const double*, double*)>;

inline Objective make_objective(Family fam, const GroupedData& g) {
    switch (family_dim(fam)) {
        case 1: return [fam, &g](const double* t, double* gr) { return grouped_nll<1>(fam, g, t, gr); };
        case 2: return [fam, &g](const double* t, double* gr) { return grouped_nll<2>(fam, g, t, gr); };
        default: return [fam, &g](const double* t, double* gr) { return grouped_nll<3>(fam, g, t, gr); };
    }
}

inline Objective make_objective(Family fam, std::span<const double> xs) {
    switch (family_dim(fam)) {
        case 1: return [fam, xs](const double* t, double* gr) { return raw_nll<1>(fam, xs, t, gr); };
        case 2: return [fam, xs](const double* t, double* gr) { return raw_nll<2>(fam, xs, t, gr); };
        default: return [fam, xs](const double* t, double* gr) { return raw_nll<3>(fam, xs, t, gr); };
    }
}

struct OptResult {
    std::array<double, 3> x{};
    double f = 0.0;
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
};

inline double inf_norm(const double* g, size_t d) {
    double m = 0.0;
    for (size_t i = 0; i < d; ++i) m = std::max(m, std::fabs(g[i]));
    return m;
}

/// BFGS (inverse-Hessian form) with backtracking Armijo line search.
inline OptResult bfgs(size_t dim, const Objective& fn, std::array<double, 3> x0,
                      int max_iter = 500, double gtol = 1e-8) {
    OptResult res;
    res.x = x0;
    std::array<double, 9> H{};  // row-major dim x dim, start at identity
    for (size_t i = 0; i < dim; ++i) H[i * dim + i] = 1.0;
    std::array<double, 3> g{}, gn{}, d{}, s{}, y{};
    double f = fn(res.x.data(), g.data());
    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter;
        res.f = f;
        res.grad_norm = inf_norm(g.data(), dim);
        if (!std::isfinite(f) || !std::isfinite(res.grad_norm)) return res;
        if (res.grad_norm <= gtol * std::max(1.0, std::fabs(f))) {
            res.converged = true;
            return res;
        }
        for (size_t i = 0; i < dim; ++i) {
            d[i] = 0.0;
            for (size_t j = 0; j < dim; ++j) d[i] -= H[i * dim + j] * g[j];
        }
        double gd = 0.0;
        for (size_t i = 0; i < dim; ++i) gd += g[i] * d[i];
        if (!(gd < 0.0)) {  // not a descent direction: reset to steepest descent
            for (size_t i = 0; i < dim; ++i) {
                for (size_t j = 0; j < dim; ++j) H[i * dim + j] = (i == j) ? 1.0 : 0.0;
                d[i] = -g[i];
            }
            gd = 0.0;
            for (size_t i = 0; i < dim; ++i) gd += g[i] * d[i];
            if (!(gd < 0.0)) return res;  // zero gradient handled above
        }
        double step = 1.0;
        double fn_new = std::numeric_limits<double>::infinity();
        std::array<double, 3> xn{};
        bool ok = false;
        const double f_eps = 1e-14 * std::max(1.0, std::fabs(f));  // objective noise floor
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t i = 0; i < dim; ++i) xn[i] = res.x[i] + step * d[i];
            fn_new = fn(xn.data(), gn.data());
            if (std::isfinite(fn_new) && fn_new <= f + 1e-4 * step * gd + f_eps) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) return res;  // line search floor; caller decides what next
        for (size_t i = 0; i < dim; ++i) {
            s[i] = xn[i] - res.x[i];
            y[i] = gn[i] - g[i];
        }
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            sy += s[i] * y[i];
            ss += s[i] * s[i];
            yy += y[i] * y[i];
        }
        if (iter == 0 && sy > 0.0 && yy > 0.0) {
            // Shanno scaling of the initial inverse Hessian
            const double scale = sy / yy;
            for (size_t i = 0; i < dim; ++i) {
                for (size_t j = 0; j < dim; ++j) H[i * dim + j] = (i == j) ? scale : 0.0;
            }
        }
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            const double rho = 1.0 / sy;
            std::array<double, 9> Hy{};
            for (size_t i = 0; i < dim; ++i) {
                for (size_t j = 0; j < dim; ++j) Hy[i] += H[i * dim + j] * y[j];
            }
            double yHy = 0.0;
            for (size_t i = 0; i < dim; ++i) yHy += y[i] * Hy[i];
            for (size_t i = 0; i < dim; ++i) {
                for (size_t j = 0; j < dim; ++j) {
                    H[i * dim + j] += -rho * (s[i] * Hy[j] + Hy[i] * s[j]) +
                                      rho * (1.0 + rho * yHy) * s[i] * s[j];
                }
            }
        }
        res.x = xn;
        f = fn_new;
        g = gn;
    }
    res.iterations = max_iter;
    res.f = f;
    res.grad_norm = inf_norm(g.data(), dim);
    res.converged = res.grad_norm <= gtol * std::max(1.0, std::fabs(f));
    return res;
}

/// Nelder-Mead fallback for when quasi-Newton stalls.
inline std::array<double, 3> nelder_mead(size_t dim, const Objective& fn,
                                         std::array<double, 3> x0, int max_evals = 4000) {
    const size_t m = dim + 1;
    std::vector<std::array<double, 3>> sx(m, x0);
    std::vector<double> sf(m);
    for (size_t i = 0; i < dim; ++i) sx[i + 1][i] += 0.1;
    int evals = 0;
    auto eval = [&](const std::array<double, 3>& p) {
        ++evals;
        const double v = fn(p.data(), nullptr);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    for (size_t i = 0; i < m; ++i) sf[i] = eval(sx[i]);
    while (evals < max_evals) {
        std::vector<size_t> idx(m);
        for (size_t i = 0; i < m; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return sf[a] < sf[b]; });
        const size_t best = idx[0], worst = idx[m - 1], second = idx[m - 2];
        if (std::fabs(sf[worst] - sf[best]) <= 1e-14 * (std::fabs(sf[best]) + 1e-14)) break;
        std::array<double, 3> centroid{};
        for (size_t i = 0; i < m; ++i) {
            if (i == worst) continue;
            for (size_t k = 0; k < dim; ++k) centroid[k] += sx[i][k] / static_cast<double>(dim);
        }
        auto blend = [&](double t) {
            std::array<double, 3> p{};
            for (size_t k = 0; k < dim; ++k) p[k] = centroid[k] + t * (sx[worst][k] - centroid[k]);
            return p;
        };
        const auto xr = blend(-1.0);
        const double fr = eval(xr);
        if (fr < sf[best]) {
            const auto xe = blend(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                sx[worst] = xe;
                sf[worst] = fe;
            } else {
                sx[worst] = xr;
                sf[worst] = fr;
            }
        } else if (fr < sf[second]) {
            sx[worst] = xr;
            sf[worst] = fr;
        } else {
            const auto xc = blend(fr < sf[worst] ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, sf[worst])) {
                sx[worst] = xc;
                sf[worst] = fc;
            } else {
                for (size_t i = 0; i < m; ++i) {
                    if (i == best) continue;
                    for (size_t k = 0; k < dim; ++k) sx[i][k] = 0.5 * (sx[i][k] + sx[best][k]);
                    sf[i] = eval(sx[i]);
                }
            }
        }
    }
    size_t best = 0;
    for (size_t i = 1; i < m; ++i) {
        if (sf[i] < sf[best]) best = i;
    }
    return sx[best];
}

/// Observed information (Hessian of the total negative log-likelihood) via
/// central differences of the exact gradient.
inline std::array<std::array<double, 3>, 3> fd_hessian(size_t dim, const Objective& fn,
                                                       const std::array<double, 3>& x, double n) {
    std::array<std::array<double, 3>, 3> Hm{};
    std::array<double, 3> xp{}, gp{}, gm{};
    for (size_t i = 0; i < dim; ++i) {
        const double h = 1e-5 * std::max(1.0, std::fabs(x[i]));
        xp = x;
        xp[i] += h;
        fn(xp.data(), gp.data());
        xp[i] -= 2.0 * h;
        fn(xp.data(), gm.data());
        for (size_t j = 0; j < dim; ++j) Hm[i][j] = (gp[j] - gm[j]) / (2.0 * h) * n;
    }
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = i + 1; j < dim; ++j) {
            const double a = 0.5 * (Hm[i][j] + Hm[j][i]);
            Hm[i][j] = Hm[j][i] = a;
        }
    }
    return Hm;
}

/// Cholesky-based inverse of a small SPD matrix; empty optional if not PD.
inline std::optional<std::array<std::array<double, 3>, 3>> spd_inverse(
    size_t dim, const std::array<std::array<double, 3>, 3>& A) {
    std::array<std::array<double, 3>, 3> L{};
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            double s = A[i][j];
            for (size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            if (i == j) {
                if (!(s > 0.0)) return std::nullopt;
                L[i][i] = std::sqrt(s);
            } else {
                L[i][j] = s / L[j][j];
            }
        }
    }
    // invert L, then A^{-1} = L^{-T} L^{-1}
    std::array<std::array<double, 3>, 3> Li{};
    for (size_t i = 0; i < dim; ++i) {
        Li[i][i] = 1.0 / L[i][i];
        for (size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (size_t k = j; k < i; ++k) s -= L[i][k] * Li[k][j];
            Li[i][j] = s / L[i][i];
        }
    }
    std::array<std::array<double, 3>, 3> inv{};
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (size_t k = std::max(i, j); k < dim; ++k) s += Li[k][i] * Li[k][j];
            inv[i][j] = s;
        }
    }
    return inv;
}

inline FamilyParams initial_guess(Family fam, double mean, double m2, double mean_log,
                                  double var_log) {
    const double var = std::max(m2 - mean * mean, 1e-12 * m2);
    switch (fam) {
        case Family::rayleigh:
            return FamilyParams::rayleigh(std::sqrt(0.5 * m2));
        case Family::log_normal:
            return FamilyParams::log_normal(mean_log, std::sqrt(std::max(var_log, 1e-8)));
        case Family::gamma:
            return FamilyParams::gamma(mean * mean / var, mean / var);
        case Family::weibull: {
            const double k = 3.14159265358979 / std::sqrt(6.0 * std::max(var_log, 1e-8));
            const double scale = std::exp(mean_log + 0.57721566490153287 / k);
            return FamilyParams::weibull(k, scale);
        }
        case Family::generalized_gamma:
            // refined by a Gamma pre-fit in fit_mle
            return FamilyParams::gg({1.0, mean / var, mean * mean / var});
    }
    throw std::logic_error("initial_guess: unreachable");
}

}  // namespace fitdetail

/// Root-mean-square and sup deviation between the accumulator ECDF and a
/// fitted CDF, on the accumulator grid restricted to ECDF in
/// [1e-4, 1 - 1e-4] (so tail quantization does not dominate the sup norm).
inline std::pair<double, double> gof_metrics(const EcdfAccumulator& acc,
                                             const std::function<double(double)>& cdf) {
    if (acc.n() == 0) throw DataError("gof_metrics: empty accumulator");
    const auto ecdf = acc.ecdf_at_edges();
    double sq = 0.0, mx = 0.0;
    size_t used = 0;
    for (size_t j = 0; j < ecdf.size(); ++j) {
        if (ecdf[j] < 1e-4 || ecdf[j] > 1.0 - 1e-4) continue;
        const double d = ecdf[j] - cdf(acc.upper_edge(j));
        sq += d * d;
        mx = std::max(mx, std::fabs(d));
        ++used;
    }
    if (used == 0) {
        for (size_t j = 0; j < ecdf.size(); ++j) {
            const double d = ecdf[j] - cdf(acc.upper_edge(j));
            sq += d * d;
            mx = std::max(mx, std::fabs(d));
            ++used;
        }
    }
    return {std::sqrt(sq / static_cast<double>(used)), mx};
}

namespace fitdetail {

inline FitResult finish_fit(Family fam, size_t dim, const Objective& obj, OptResult opt,
                            uint64_t n, std::vector<std::string> warnings) {
    FitResult fit;
    fit.family = fam;
    fit.params = params_from_theta(fam, opt.x.data());
    fit.n = n;
    fit.converged = opt.converged;
    fit.iterations = opt.iterations;
    fit.gradient_norm = opt.grad_norm;
    fit.log_likelihood = -opt.f * static_cast<double>(n);
    fit.aic = 2.0 * static_cast<double>(dim) - 2.0 * fit.log_likelihood;
    fit.bic = std::log(static_cast<double>(n)) * static_cast<double>(dim) -
              2.0 * fit.log_likelihood;
    fit.warnings = std::move(warnings);

    const auto H = fd_hessian(dim, obj, opt.x, static_cast<double>(n));
    if (const auto inv = spd_inverse(dim, H)) {
        fit.covariance = *inv;
        fit.covariance_valid = true;
        const double z = normal_quantile(0.975);
        for (size_t i = 0; i < dim; ++i) {
            const double se = std::sqrt((*inv)[i][i]);
            if (!std::isfinite(se) || se == 0.0) continue;
            const double lo = opt.x[i] - z * se;
            const double hi = opt.x[i] + z * se;
            if (is_log_dim(fam, i)) {
                fit.ci_95[i] = {std::exp(lo), std::exp(hi), true};
            } else {
                fit.ci_95[i] = {lo, hi, true};
            }
        }
    } else {
        fit.warnings.push_back(
            "flat likelihood: observed information not positive definite; intervals omitted");
    }
    return fit;
}

inline FitResult fit_common(Family fam, const Objective& obj, uint64_t n, double mean, double m2,
                            double mean_log, double var_log,
                            const Objective* gamma_obj = nullptr) {
    const size_t dim = family_dim(fam);
    std::vector<std::string> warnings;

    const double var = m2 - mean * mean;
    if (!(var > 1e-14 * m2)) {
        // All observations are (numerically) identical.
        if (fam == Family::rayleigh) {
            OptResult opt;
            opt.x = theta_from_params(FamilyParams::rayleigh(std::sqrt(0.5 * m2)));
            opt.f = obj(opt.x.data(), nullptr);
            opt.converged = true;
            FitResult fit = finish_fit(fam, dim, obj, opt, n, std::move(warnings));
            fit.warnings.push_back("degenerate data: zero sample variance; fit is non-informative");
            fit.covariance_valid = false;
            for (auto& ci : fit.ci_95) ci.valid = false;
            return fit;
        }
        throw DegenerateDataError("fit_mle: degenerate data (all values equal)");
    }

    FamilyParams guess = initial_guess(fam, mean, m2, mean_log, var_log);
    if (fam == Family::generalized_gamma && gamma_obj) {
        // Fit the Gamma sub-family first, seed with (a=1, b=rate, c=shape),
        // then release a. Avoids starting on the (a, c) ridge.
        auto gtheta = theta_from_params(initial_guess(Family::gamma, mean, m2, mean_log, var_log));
        const OptResult gopt = bfgs(2, *gamma_obj, gtheta);
        const FamilyParams gp = params_from_theta(Family::gamma, gopt.x.data());
        guess = FamilyParams::gg({1.0, gp.p[1], gp.p[0]});
    }

    auto theta0 = theta_from_params(guess);
    OptResult opt = bfgs(dim, obj, theta0);
    if (!opt.converged) {
        const auto nm = nelder_mead(dim, obj, opt.iterations > 0 ? opt.x : theta0);
        OptResult retry = bfgs(dim, obj, nm);
        retry.iterations += opt.iterations;
        if (retry.f <= opt.f || retry.converged) opt = retry;
    }
    if (!opt.converged) {
        throw NonConvergenceError(
            std::string("fit_mle(") + family_name(fam) + "): no convergence after " +
            std::to_string(opt.iterations) + " iterations; |grad| = " +
            std::to_string(opt.grad_norm) + ", nll/n = " + std::to_string(opt.f));
    }
    return finish_fit(fam, dim, obj, opt, n, std::move(warnings));
}

}  // namespace fitdetail

/// Maximum-likelihood fit of one family to binned data. The likelihood is the
/// grouped one (bin-probability terms); optimization runs in log-parameter
/// space with exact gradients.
inline FitResult fit_mle(Family family, const EcdfAccumulator& acc) {
    if (acc.n() < 1000) {
        throw SampleSizeError("fit_mle: needs at least 1000 samples, got " +
                              std::to_string(acc.n()));
    }
    const auto g = fitdetail::group(acc);
    const auto obj = fitdetail::make_objective(family, g);
    const auto gamma_obj = fitdetail::make_objective(Family::gamma, g);
    FitResult fit = fitdetail::fit_common(family, obj, g.n, g.mean, g.m2, g.mean_log, g.var_log,
                                          &gamma_obj);
    const FamilyParams fp = fit.params;
    const auto [rmse, maxabs] =
        gof_metrics(acc, [fp](double x) { return family_cdf(x, fp); });
    fit.rmse = rmse;
    fit.max_abs_variation = maxabs;
    return fit;
}

/// Maximum-likelihood fit on raw samples (all values must be positive).
inline FitResult fit_mle(Family family, std::span<const double> values) {
    if (values.size() < 1000) {
        throw SampleSizeError("fit_mle: needs at least 1000 samples, got " +
                              std::to_string(values.size()));
    }
    double mean = 0.0, m2 = 0.0, mean_log = 0.0, var_log = 0.0;
    double vmax = 0.0;
    for (const double x : values) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw DataError("fit_mle: raw samples must be positive and finite");
        }
        vmax = std::max(vmax, x);
    }
    const double inv_n = 1.0 / static_cast<double>(values.size());
    for (const double x : values) {
        mean += x * inv_n;
        m2 += x * x * inv_n;
        const double lx = std::log(x);
        mean_log += lx * inv_n;
        var_log += lx * lx * inv_n;
    }
    var_log = std::max(var_log - mean_log * mean_log, 0.0);
    const auto obj = fitdetail::make_objective(family, values);
    const auto gamma_obj = fitdetail::make_objective(Family::gamma, values);
    FitResult fit = fitdetail::fit_common(family, obj, values.size(), mean, m2, mean_log, var_log,
                                          &gamma_obj);
    // GoF against a binned ECDF of the same values
    EcdfAccumulator acc(4096, vmax * 1.0000001);
    for (const double x : values) acc.add(x);
    const FamilyParams fp = fit.params;
    const auto [rmse, maxabs] =
        gof_metrics(acc, [fp](double x) { return family_cdf(x, fp); });
    fit.rmse = rmse;
    fit.max_abs_variation = maxabs;
    return fit;
}

/// Re-derive per-parameter intervals from a converged fit at another level.
inline std::array<ConfidenceInterval, 3> confidence_intervals(const FitResult& fit,
                                                              double level) {
    if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must be in (0,1)");
    std::array<ConfidenceInterval, 3> out{};
    if (!fit.covariance_valid) return out;
    const double z = normal_quantile(0.5 + 0.5 * level);
    const auto theta = fitdetail::theta_from_params(fit.params);
    for (size_t i = 0; i < family_dim(fit.family); ++i) {
        const double se = std::sqrt(fit.covariance[i][i]);
        if (!std::isfinite(se) || se == 0.0) continue;
        const double lo = theta[i] - z * se;
        const double hi = theta[i] + z * se;
        out[i] = fitdetail::is_log_dim(fit.family, i)
                     ? ConfidenceInterval{std::exp(lo), std::exp(hi), true}
                     : ConfidenceInterval{lo, hi, true};
    }
    return out;
}

struct RankedFits {
    std::vector<FitResult> ranked;  // ascending by rmse
    std::vector<std::pair<Family, std::string>> failures;
};

/// Fit all five families and order them by RMSE against the empirical CDF.
inline RankedFits rank_families(const EcdfAccumulator& acc) {
    if (acc.n() < 10000) {
        throw SampleSizeError("rank_families: needs at least 1e4 samples, got " +
                              std::to_string(acc.n()));
    }
    RankedFits out;
    for (Family f : {Family::generalized_gamma, Family::gamma, Family::log_normal,
                     Family::rayleigh, Family::weibull}) {
        try {
            out.ranked.push_back(fit_mle(f, acc));
        } catch (const std::exception& e) {
            out.failures.emplace_back(f, e.what());
        }
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [](const FitResult& a, const FitResult& b) { return a.rmse < b.rmse; });
    return out;
}

}  // namespace pve
