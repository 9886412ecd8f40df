#include "bgidx/errors.hpp"
#include "bgidx/estimators.hpp"

#include <boost/math/tools/minima.hpp>
#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

using namespace bgidx;
using est::PowerTerm;

namespace {

est::ContrastData synthetic(double u_n, const est::ContrastConfig& cfg,
                            std::vector<PowerTerm> terms) {
    est::ContrastData d;
    d.thresholds = est::contrast_thresholds(u_n, cfg);
    for (double u : d.thresholds) {
        double s = 0;
        for (auto t : terms) s += t.intensity * std::pow(u, -t.exponent);
        d.counts.push_back(s);
    }
    return d;
}

est::EstimateSet start_from(std::vector<std::pair<double, double>> bg) {
    est::EstimateSet s;
    for (auto [b, g] : bg) s.entries.push_back({b, g, est::Status::Ok});
    return s;
}

est::ContrastConfig two_point() {
    est::ContrastConfig cfg;
    cfg.v_grid = {1.0, 2.0};
    return cfg;
}

}  // namespace

TEST(ContrastValue, Examples) {
    const auto cfg = two_point();
    est::ContrastData d{{0.01, 0.02}, {200, 100}};
    const std::vector<PowerTerm> fit = {{1.0, 2.0}};
    EXPECT_NEAR(est::contrast_value(d, cfg, fit), 0.0, 1e-20);
    const std::vector<PowerTerm> zero = {{1.0, 0.0}};
    EXPECT_DOUBLE_EQ(est::contrast_value(d, cfg, zero), 50000.0);

    counts::TailCountCurve curve;
    curve.points = {{0.01, 200}, {0.02, 100}};
    EXPECT_DOUBLE_EQ(est::contrast_value(curve, cfg, zero), 50000.0);
}

TEST(ContrastValue, PermutationInvariant) {
    est::ContrastConfig cfg;
    cfg.weights = est::decreasing_weights(cfg.v_grid);
    Rng rng(3);
    const auto d = synthetic(0.01, cfg, {{1.2, 3.0}, {0.7, 5.0}});
    for (int t = 0; t < 100; ++t) {
        const std::vector<PowerTerm> p = {{rng.uniform(0, 2), rng.uniform(0, 9)},
                                          {rng.uniform(0, 2), rng.uniform(0, 9)}};
        const std::vector<PowerTerm> q = {p[1], p[0]};
        EXPECT_DOUBLE_EQ(est::contrast_value(d, cfg, p), est::contrast_value(d, cfg, q));
    }
}

TEST(ContrastValue, DomainChecks) {
    const auto cfg = two_point();
    est::ContrastData d{{0.01, 0.02}, {200, 100}};
    const std::vector<PowerTerm> neg = {{1.0, -1.0}};
    EXPECT_THROW((void)est::contrast_value(d, cfg, neg), DomainError);
    const std::vector<PowerTerm> big = {{2.5, 1.0}};
    EXPECT_THROW((void)est::contrast_value(d, cfg, big), DomainError);
    est::ContrastData off{{0.01, 0.03}, {200, 100}};  // not v_l u_n
    const std::vector<PowerTerm> ok = {{1.0, 1.0}};
    EXPECT_THROW((void)est::contrast_value(off, cfg, ok), DomainError);
}

TEST(ContrastConfig, Validation) {
    est::ContrastConfig cfg;
    EXPECT_NO_THROW(cfg.validate(2));
    EXPECT_EQ(cfg.v_grid.size(), 10u);
    EXPECT_EQ(cfg.v_grid.front(), 1.0);
    EXPECT_NEAR(cfg.v_grid.back(), 120.0 / 7.0, 1e-15);
    EXPECT_THROW(cfg.validate(6), DomainError);  // L >= 2j
    cfg.v_grid = {1.0, 3.0, 2.0, 4.0};
    EXPECT_THROW(cfg.validate(1), DomainError);
    cfg.v_grid = {1.5, 3.0};
    EXPECT_THROW(cfg.validate(1), DomainError);
    cfg = {};
    cfg.weights = std::vector<double>(10, 1.0);
    cfg.weights[3] = 0.0;
    EXPECT_THROW(cfg.validate(2), DomainError);
}

TEST(ProfileGammas, ExactFitAndRank) {
    const auto cfg = two_point();
    est::ContrastData d{{0.01, 0.02}, {200, 100}};
    const std::vector<double> x = {1.0};
    EXPECT_NEAR(est::profile_gammas(d, cfg, x)[0], 2.0, 1e-12);

    est::ContrastConfig full;
    const auto d2 = synthetic(0.01, full, {{1.0, 2.0}, {0.5, 1.0}});
    const std::vector<double> dup = {0.8, 0.8};
    EXPECT_THROW((void)est::profile_gammas(d2, full, dup), RankDeficientError);
}

TEST(ProfileGammas, GridSearchOracle) {
    est::ContrastConfig cfg;
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        auto d = synthetic(0.01, cfg, {{1.3, 2.0}, {0.6, 4.0}});
        for (auto& c : d.counts) c *= 1 + 0.2 * (rng.uniform() - 0.5);
        const std::vector<double> x = {rng.uniform(1.0, 1.6), rng.uniform(0.3, 0.9)};
        const auto g = est::profile_gammas(d, cfg, x);
        const double best = est::contrast_value(d, cfg, std::vector<PowerTerm>{{x[0], g[0]}, {x[1], g[1]}});
        // dense grid around the optimum, clipped at zero
        double grid_best = INFINITY;
        const double s0 = std::max(0.5, g[0]), s1 = std::max(0.5, g[1]);
        for (int a = -100; a <= 100; ++a) {
            for (int b = -100; b <= 100; ++b) {
                const double g0 = std::max(0.0, g[0] + s0 * a / 100.0);
                const double g1 = std::max(0.0, g[1] + s1 * b / 100.0);
                grid_best = std::min(grid_best, est::contrast_value(
                                                    d, cfg, std::vector<PowerTerm>{{x[0], g0}, {x[1], g1}}));
            }
        }
        EXPECT_LE(best, grid_best * (1 + 1e-12));
        EXPECT_GE(g[0], 0.0);
        EXPECT_GE(g[1], 0.0);
    }
}

TEST(ProfileGammas, BeatsRandomDraws) {
    est::ContrastConfig cfg;
    cfg.weights = est::decreasing_weights(cfg.v_grid);
    Rng rng(4);
    auto d = synthetic(0.02, cfg, {{1.1, 1.0}, {0.4, 0.5}});
    for (auto& c : d.counts) c *= 1 + 0.3 * (rng.uniform() - 0.5);
    const std::vector<double> x = {1.0, 0.5};
    const auto g = est::profile_gammas(d, cfg, x);
    const double best = est::contrast_value(d, cfg, std::vector<PowerTerm>{{x[0], g[0]}, {x[1], g[1]}});
    for (int t = 0; t < 10'000; ++t) {
        const std::vector<PowerTerm> p = {{x[0], rng.uniform(0, 3 * g[0] + 1)},
                                          {x[1], rng.uniform(0, 3 * g[1] + 1)}};
        ASSERT_LE(best, est::contrast_value(d, cfg, p));
    }
}

TEST(ProfileGammas, ClipsAtZero) {
    // second column only hurts: its optimal unconstrained weight is negative
    est::ContrastConfig cfg;
    auto d = synthetic(0.01, cfg, {{1.5, 1.0}});
    const auto u = d.thresholds;
    for (std::size_t l = 0; l < u.size(); ++l) d.counts[l] -= 0.5 * std::pow(u[l], -0.2);
    const std::vector<double> x = {1.5, 0.2};
    const auto g = est::profile_gammas(d, cfg, x);
    EXPECT_EQ(g[1], 0.0);
    EXPECT_NEAR(g[0], 1.0, 0.05);
}

TEST(FinalEstimate, ExactFitRecovery) {
    est::ContrastConfig cfg;
    const auto d = synthetic(0.01, cfg, {{1.0, 10.0}, {0.75, 5.0}});
    const auto t0 = std::chrono::steady_clock::now();
    const auto e = est::final_estimate_from_data(d, start_from({{0.95, 12.0}, {0.7, 4.0}}), cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ASSERT_EQ(e.usable_count(), 2u);
    EXPECT_NEAR(e.entries[0].beta, 1.0, 1e-6);
    EXPECT_NEAR(e.entries[0].gamma, 10.0, 1e-6);
    EXPECT_NEAR(e.entries[1].beta, 0.75, 1e-6);
    EXPECT_NEAR(e.entries[1].gamma, 5.0, 1e-6);
    EXPECT_LT(secs, 1.0);
    ASSERT_TRUE(e.optimizer.has_value());
    EXPECT_TRUE(e.optimizer->converged);
    EXPECT_EQ(e.optimizer->starts, 8u);
}

TEST(FinalEstimate, DescentFromBestStart) {
    est::ContrastConfig cfg;
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        auto d = synthetic(0.005, cfg, {{1.2, 3.0}, {0.8, 6.0}});
        for (auto& c : d.counts) c = std::round(c * (1 + 0.1 * (rng.uniform() - 0.5)));
        const auto e = est::final_estimate_from_data(d, start_from({{1.1, 3.0}, {0.7, 5.0}}), cfg);
        ASSERT_TRUE(e.contrast.has_value());
        ASSERT_TRUE(e.optimizer.has_value());
        EXPECT_LE(*e.contrast, e.optimizer->start_contrast);
        EXPECT_GE(e.entries[0].beta, e.entries[1].beta);
    }
}

TEST(FinalEstimate, SingleTermMatchesBrent) {
    est::ContrastConfig cfg;
    cfg.weights = est::decreasing_weights(cfg.v_grid);
    Rng rng(6);
    auto d = synthetic(0.01, cfg, {{1.3, 2.0}});
    for (auto& c : d.counts) c *= 1 + 0.2 * (rng.uniform() - 0.5);
    const auto e = est::final_estimate_from_data(d, start_from({{1.2, 2.5}}), cfg);
    // one-dimensional profile minimized by Brent's method
    auto profile = [&](double x) {
        const std::vector<double> xs = {x};
        const auto g = est::profile_gammas(d, cfg, xs);
        return est::contrast_value(d, cfg, std::vector<PowerTerm>{{x, g[0]}});
    };
    const auto [xb, fb] = boost::math::tools::brent_find_minima(profile, 0.5, 2.0, 50);
    ASSERT_EQ(e.usable_count(), 1u);
    EXPECT_NEAR(e.entries[0].beta, xb, 1e-6);
    EXPECT_LE(*e.contrast, fb * (1 + 1e-9));
}

TEST(FinalEstimate, NonConvergenceMarksFailed) {
    est::ContrastConfig cfg;
    cfg.max_iterations = 2;
    const auto d = synthetic(0.01, cfg, {{1.0, 10.0}, {0.75, 5.0}});
    const auto e = est::final_estimate_from_data(d, start_from({{1.5, 12.0}, {0.3, 4.0}}), cfg);
    EXPECT_EQ(e.usable_count(), 0u);
    for (const auto& x : e.entries) EXPECT_EQ(x.status, est::Status::Failed);
    ASSERT_TRUE(e.optimizer.has_value());
    EXPECT_FALSE(e.optimizer->converged);
}

TEST(FinalEstimate, BoxKeepsEstimatesNearStart) {
    est::ContrastConfig cfg;
    cfg.box = est::BoxHalfWidths{0.05, INFINITY};
    const auto d = synthetic(0.01, cfg, {{1.0, 10.0}, {0.75, 5.0}});
    const auto e = est::final_estimate_from_data(d, start_from({{1.2, 12.0}, {0.9, 4.0}}), cfg);
    ASSERT_EQ(e.usable_count(), 2u);
    EXPECT_GE(e.entries[0].beta, 1.15 - 1e-12);
    EXPECT_GE(e.entries[1].beta, 0.85 - 1e-12);
}

TEST(FinalEstimate, NeedsUsableStart) {
    est::ContrastConfig cfg;
    const auto d = synthetic(0.01, cfg, {{1.0, 10.0}});
    est::EstimateSet failed;
    failed.entries.resize(1);
    EXPECT_THROW((void)est::final_estimate_from_data(d, failed, cfg), DomainError);
}
