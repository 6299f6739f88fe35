#include "pve/fitting.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pve/distributions.hpp"
#include "pve/rng.hpp"

using namespace pve;

namespace {

EcdfAccumulator sample_gg_hist(const GGParams& p, size_t n, uint64_t seed, double cap) {
    EcdfAccumulator acc(4096, cap);
    Rng rng(seed, 0);
    for (size_t i = 0; i < n; ++i) acc.add(gg_sample(p, rng));
    return acc;
}

}  // namespace

TEST(GofMetrics, PerfectFitIsZero) {
    EcdfAccumulator acc(256, 2.0);
    Rng rng(1, 0);
    for (int i = 0; i < 20'000; ++i) acc.add(2.0 * rng.uniform());
    const auto e = acc.ecdf_at_edges();
    auto self = [&acc, &e](double x) {
        const size_t j = std::min<size_t>(acc.bins() - 1,
                                          static_cast<size_t>(x / acc.r_cap() * acc.bins() - 0.5));
        return e[j];
    };
    const auto [rmse, maxabs] = gof_metrics(acc, self);
    EXPECT_NEAR(rmse, 0.0, 1e-12);
    EXPECT_NEAR(maxabs, 0.0, 1e-12);
}

TEST(GofMetrics, ConstantOffset) {
    EcdfAccumulator acc(256, 2.0);
    Rng rng(2, 0);
    for (int i = 0; i < 50'000; ++i) acc.add(2.0 * rng.uniform());
    const auto e = acc.ecdf_at_edges();
    const double delta = 0.015;
    auto shifted = [&acc, &e, delta](double x) {
        const size_t j = std::min<size_t>(acc.bins() - 1,
                                          static_cast<size_t>(x / acc.r_cap() * acc.bins() - 0.5));
        return e[j] - delta;
    };
    const auto [rmse, maxabs] = gof_metrics(acc, shifted);
    EXPECT_NEAR(rmse, delta, 1e-12);
    EXPECT_NEAR(maxabs, delta, 1e-12);
}

TEST(GofMetrics, MatchesBruteForceRecomputation) {
    EcdfAccumulator acc(512, 3.0);
    Rng rng(3, 0);
    for (int i = 0; i < 30'000; ++i) acc.add(-std::log(1.0 - rng.uniform()));
    auto cdf = [](double x) { return 1.0 - std::exp(-x); };
    const auto [rmse, maxabs] = gof_metrics(acc, cdf);

    const auto e = acc.ecdf_at_edges();
    double sq = 0.0, mx = 0.0;
    size_t used = 0;
    for (size_t j = 0; j < e.size(); ++j) {
        if (e[j] < 1e-4 || e[j] > 1.0 - 1e-4) continue;
        const double d = e[j] - cdf(acc.upper_edge(j));
        sq += d * d;
        mx = std::max(mx, std::fabs(d));
        ++used;
    }
    EXPECT_DOUBLE_EQ(rmse, std::sqrt(sq / used));
    EXPECT_DOUBLE_EQ(maxabs, mx);
    EXPECT_THROW(gof_metrics(EcdfAccumulator(16, 1.0), cdf), DataError);
}

TEST(FitMle, RefusesTinySamples) {
    EcdfAccumulator acc(128, 2.0);
    for (int i = 0; i < 999; ++i) acc.add(0.5 + 1e-4 * i);
    EXPECT_THROW(fit_mle(Family::rayleigh, acc), SampleSizeError);
}

TEST(FitMle, RayleighDegenerateDataIsWellDefined) {
    // 1000 identical observations: closed-form sigma, flagged non-informative
    EcdfAccumulator acc(4096, 2.0);
    for (int i = 0; i < 1000; ++i) acc.add(1.0);
    const auto fit = fit_mle(Family::rayleigh, acc);
    EXPECT_NEAR(fit.params.p[0], std::sqrt(0.5), 1e-12);
    EXPECT_FALSE(fit.warnings.empty());
    EXPECT_FALSE(fit.ci_95[0].valid);
    // optimizing families reject the same data
    EXPECT_THROW(fit_mle(Family::generalized_gamma, acc), DegenerateDataError);
}

TEST(FitMle, GammaFitOnExponentialSamples) {
    EcdfAccumulator acc(4096, 16.0);
    Rng rng(10, 0);
    for (int i = 0; i < 1'000'000; ++i) acc.add(-std::log(1.0 - rng.uniform()));
    const auto fit = fit_mle(Family::gamma, acc);
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.params.p[0], 1.0, 0.01);  // shape
    EXPECT_NEAR(fit.params.p[1], 1.0, 0.01);  // rate
}

TEST(FitMle, GGParameterRecoveryWithinCis) {
    const GGParams truth{2.176, 8.446, 4.005};
    const auto acc = sample_gg_hist(truth, 1'000'000, 2024, 1.5);
    const auto fit = fit_mle(Family::generalized_gamma, acc);
    ASSERT_TRUE(fit.converged);
    const double tr[3] = {truth.a, truth.b, truth.c};
    for (int i = 0; i < 3; ++i) {
        ASSERT_TRUE(fit.ci_95[i].valid);
        EXPECT_GT(tr[i], fit.ci_95[i].lower) << "param " << i;
        EXPECT_LT(tr[i], fit.ci_95[i].upper) << "param " << i;
        EXPECT_NEAR(fit.params.p[i] / tr[i], 1.0, 0.05) << "param " << i;
        EXPECT_LT(fit.ci_95[i].lower, fit.params.p[i]);
        EXPECT_GT(fit.ci_95[i].upper, fit.params.p[i]);
    }
}

TEST(FitMle, RawAndGroupedAgree) {
    const GGParams truth{1.719, 5.528, 9.482};
    Rng rng(55, 0);
    std::vector<double> xs(200'000);
    EcdfAccumulator acc(4096, 3.0);
    for (auto& x : xs) {
        x = gg_sample(truth, rng);
        acc.add(x);
    }
    const auto fg = fit_mle(Family::generalized_gamma, acc);
    const auto fr = fit_mle(Family::generalized_gamma, std::span<const double>(xs));
    ASSERT_TRUE(fg.converged);
    ASSERT_TRUE(fr.converged);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(fg.params.p[i] / fr.params.p[i], 1.0, 2e-3) << "param " << i;
    }
}

TEST(FitMle, LogNormalClosedFormOnRawData) {
    Rng rng(66, 0);
    std::vector<double> xs(100'000);
    for (auto& x : xs) {
        const double z = rng.normal();
        x = std::exp(-0.3 + 0.7 * z);
    }
    const auto fit = fit_mle(Family::log_normal, std::span<const double>(xs));
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.params.p[0], -0.3, 0.01);
    EXPECT_NEAR(fit.params.p[1], 0.7, 0.01);
}

TEST(FitMle, AnalyticGradientMatchesFiniteDifferences) {
    const auto acc = sample_gg_hist({2.0, 6.0, 5.0}, 100'000, 7, 2.0);
    const auto g = fitdetail::group(acc);
    Rng rng(77, 0);
    for (int rep = 0; rep < 20; ++rep) {
        double theta[3] = {std::log(0.8 + 2.5 * rng.uniform()),
                           std::log(1.0 + 9.0 * rng.uniform()),
                           std::log(1.0 + 8.0 * rng.uniform())};
        double grad[3];
        fitdetail::grouped_nll<3>(Family::generalized_gamma, g, theta, grad);
        for (int i = 0; i < 3; ++i) {
            const double h = 1e-6 * std::max(1.0, std::fabs(theta[i]));
            double tp[3] = {theta[0], theta[1], theta[2]};
            tp[i] += h;
            const double fp = fitdetail::grouped_nll<3>(Family::generalized_gamma, g, tp, nullptr);
            tp[i] -= 2 * h;
            const double fm = fitdetail::grouped_nll<3>(Family::generalized_gamma, g, tp, nullptr);
            const double fd = (fp - fm) / (2 * h);
            EXPECT_NEAR(grad[i], fd, 1e-5 * std::max(1.0, std::fabs(fd)))
                << "rep " << rep << " dim " << i;
        }
    }
}

TEST(FitMle, NestingOfSubFamilies) {
    // GG contains Gamma (a=1) and Weibull (c=a): its max log-likelihood
    // cannot be lower, up to optimizer tolerance per sample
    const auto acc = sample_gg_hist({2.176, 8.446, 4.005}, 300'000, 31, 1.5);
    const auto gg = fit_mle(Family::generalized_gamma, acc);
    const auto gamma = fit_mle(Family::gamma, acc);
    const auto weibull = fit_mle(Family::weibull, acc);
    const double tol = 1e-6 * static_cast<double>(acc.n());
    EXPECT_GE(gg.log_likelihood, gamma.log_likelihood - tol);
    EXPECT_GE(gg.log_likelihood, weibull.log_likelihood - tol);
}

TEST(FitMle, ScaleEquivariance) {
    const GGParams truth{2.0, 7.0, 5.0};
    Rng rng(90, 0);
    std::vector<double> xs(200'000);
    for (auto& x : xs) x = gg_sample(truth, rng);
    const double s = 2.5;
    std::vector<double> ys(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] * s;
    const auto fx = fit_mle(Family::generalized_gamma, std::span<const double>(xs));
    const auto fy = fit_mle(Family::generalized_gamma, std::span<const double>(ys));
    ASSERT_TRUE(fx.converged && fy.converged);
    // (a, b, c) -> (a, b s^-a, c)
    EXPECT_NEAR(fy.params.p[0] / fx.params.p[0], 1.0, 1e-3);
    EXPECT_NEAR(fy.params.p[2] / fx.params.p[2], 1.0, 1e-3);
    EXPECT_NEAR(fy.params.p[1] / (fx.params.p[1] * std::pow(s, -fy.params.p[0])), 1.0, 5e-3);
    EXPECT_NEAR(fy.rmse, fx.rmse, 5e-4);
    EXPECT_NEAR(fy.max_abs_variation, fx.max_abs_variation, 2e-3);
}

TEST(ConfidenceIntervals, CoverageOnSyntheticRepetitions) {
    // quick version; the acceptance suite runs 100 repetitions at 1e6 samples
    const GGParams truth{2.176, 8.446, 4.005};
    const double tr[3] = {truth.a, truth.b, truth.c};
    int covered[3] = {0, 0, 0};
    const int reps = 30;
    for (int r = 0; r < reps; ++r) {
        const auto acc = sample_gg_hist(truth, 200'000, 5000 + r, 1.5);
        const auto fit = fit_mle(Family::generalized_gamma, acc);
        for (int i = 0; i < 3; ++i) {
            if (fit.ci_95[i].valid && tr[i] > fit.ci_95[i].lower && tr[i] < fit.ci_95[i].upper) {
                ++covered[i];
            }
        }
    }
    for (int i = 0; i < 3; ++i) {
        EXPECT_GE(covered[i], 25) << "param " << i << " covered " << covered[i] << "/" << reps;
    }
}

TEST(ConfidenceIntervals, WidthShrinksAsRootN) {
    const GGParams truth{2.176, 8.446, 4.005};
    const auto small = fit_mle(Family::generalized_gamma, sample_gg_hist(truth, 10'000, 1, 1.5));
    const auto large = fit_mle(Family::generalized_gamma, sample_gg_hist(truth, 1'000'000, 2, 1.5));
    ASSERT_TRUE(small.ci_95[0].valid && large.ci_95[0].valid);
    const double ws = small.ci_95[0].upper - small.ci_95[0].lower;
    const double wl = large.ci_95[0].upper - large.ci_95[0].lower;
    const double ratio = wl / ws;  // expect about 0.1
    EXPECT_GT(ratio, 0.1 / 1.5);
    EXPECT_LT(ratio, 0.1 * 1.5);
}

TEST(ConfidenceIntervals, RequestedLevelMatchesStoredAt95) {
    const auto acc = sample_gg_hist({2.0, 6.0, 5.0}, 50'000, 4, 2.0);
    const auto fit = fit_mle(Family::generalized_gamma, acc);
    const auto ci = confidence_intervals(fit, 0.95);
    for (size_t i = 0; i < 3; ++i) {
        ASSERT_TRUE(ci[i].valid);
        EXPECT_NEAR(ci[i].lower, fit.ci_95[i].lower, 1e-9 * fit.ci_95[i].lower);
        EXPECT_NEAR(ci[i].upper, fit.ci_95[i].upper, 1e-9 * fit.ci_95[i].upper);
    }
    const auto wide = confidence_intervals(fit, 0.999);
    EXPECT_LT(wide[0].lower, ci[0].lower);
    EXPECT_GT(wide[0].upper, ci[0].upper);
    EXPECT_THROW(confidence_intervals(fit, 1.5), UsageError);
}

TEST(RankFamilies, WeibullDataPrefersWeibullOverGamma) {
    Rng rng(8, 0);
    EcdfAccumulator acc(4096, 4.0);
    for (int i = 0; i < 400'000; ++i) {
        const double u = 1.0 - rng.uniform();
        acc.add(1.2 * std::pow(-std::log(u), 1.0 / 2.4));  // Weibull(k=2.4, scale=1.2)
    }
    const auto ranked = rank_families(acc);
    ASSERT_TRUE(ranked.failures.empty());
    double weibull_rmse = -1.0, gamma_rmse = -1.0;
    for (const auto& fit : ranked.ranked) {
        if (fit.family == Family::weibull) weibull_rmse = fit.rmse;
        if (fit.family == Family::gamma) gamma_rmse = fit.rmse;
    }
    ASSERT_GE(weibull_rmse, 0.0);
    ASSERT_GE(gamma_rmse, 0.0);
    EXPECT_LE(weibull_rmse, gamma_rmse);
    // ranked ascending
    for (size_t i = 1; i < ranked.ranked.size(); ++i) {
        EXPECT_LE(ranked.ranked[i - 1].rmse, ranked.ranked[i].rmse);
    }
}

TEST(RankFamilies, PerFamilyFailuresAreRecordedInline) {
    // constant data: Rayleigh has a defined closed form, the optimizing
    // families raise degenerate-data errors that must not kill the ranking
    EcdfAccumulator acc(4096, 2.0);
    for (int i = 0; i < 20'000; ++i) acc.add(1.0);
    const auto ranked = rank_families(acc);
    ASSERT_EQ(ranked.ranked.size(), 1u);
    EXPECT_EQ(ranked.ranked[0].family, Family::rayleigh);
    EXPECT_EQ(ranked.failures.size(), 4u);
}

TEST(RankFamilies, RefusesSmallSamples) {
    EcdfAccumulator acc(128, 2.0);
    Rng rng(3, 3);
    for (int i = 0; i < 5000; ++i) acc.add(rng.uniform() + 0.1);
    EXPECT_THROW(rank_families(acc), SampleSizeError);
}
