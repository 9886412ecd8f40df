#include "bgidx/counts.hpp"
#include "bgidx/errors.hpp"
#include "bgidx/statistics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bgidx;
using counts::Side;

TEST(CountIncrements, Examples) {
    const std::vector<double> x = {0.5, -1.2, 0.05, 0.41};
    EXPECT_EQ(counts::count_increments(x, 0.4, Side::Absolute), 3u);
    EXPECT_EQ(counts::count_increments(x, 0.4, Side::Positive), 2u);
    EXPECT_EQ(counts::count_increments(x, 0.4, Side::Negative), 1u);
    EXPECT_EQ(counts::count_increments({}, 0.4), 0u);
    // strict inequality
    EXPECT_EQ(counts::count_increments(x, 0.5, Side::Positive), 0u);
}

TEST(CountIncrements, SidesAddUp) {
    Rng rng(4);
    std::vector<double> x(5000);
    for (auto& v : x) v = rng.normal() * std::exp(rng.normal());
    x.push_back(0.0);
    x.push_back(1.0);
    x.push_back(-1.0);
    for (double u : {1e-3, 0.1, 0.5, 1.0, 2.0, 7.0}) {
        EXPECT_EQ(counts::count_increments(x, u, Side::Absolute),
                  counts::count_increments(x, u, Side::Positive) +
                      counts::count_increments(x, u, Side::Negative));
    }
}

TEST(TailCurve, MatchesBruteForce) {
    Rng rng(12);
    std::vector<double> x(20000);
    for (auto& v : x) v = rng.normal() / (0.05 + rng.uniform());
    std::vector<double> th;
    for (double u = 0.01; u < 50; u *= 1.37) th.push_back(u);
    th.push_back(1.0);  // exact hit on a sample value is still fine
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end()), th.end());
    x[0] = 1.0;
    for (auto side : {Side::Absolute, Side::Positive, Side::Negative}) {
        const auto curve = counts::tail_curve(x, th, side);
        ASSERT_EQ(curve.size(), th.size());
        for (std::size_t k = 0; k < th.size(); ++k) {
            std::uint64_t brute = 0;
            for (double v : x) {
                brute += side == Side::Absolute   ? std::abs(v) > th[k]
                         : side == Side::Positive ? v > th[k]
                                                  : v < -th[k];
            }
            EXPECT_EQ(curve.points[k].count, brute);
            if (k > 0) EXPECT_LE(curve.points[k].count, curve.points[k - 1].count);
        }
    }
}

TEST(TailCurve, SingletonAndValidation) {
    const std::vector<double> x = {0.5, -1.2, 0.05, 0.41};
    const std::vector<double> one = {0.4};
    const auto c = counts::tail_curve(x, one);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.points[0].count, counts::count_increments(x, 0.4));
    const std::vector<double> bad = {0.4, 0.4};
    EXPECT_THROW((void)counts::tail_curve(x, bad), DomainError);
    const std::vector<double> neg = {-0.1, 0.4};
    EXPECT_THROW((void)counts::tail_curve(x, neg), DomainError);
}

TEST(ExceedanceCounter, AgreesWithDirectCount) {
    Rng rng(5);
    std::vector<double> x(3000);
    for (auto& v : x) v = rng.normal();
    for (auto side : {Side::Absolute, Side::Positive, Side::Negative}) {
        counts::ExceedanceCounter counter(x, side);
        for (double u = 0.05; u < 4; u += 0.13) {
            EXPECT_EQ(counter.count_above(u), counts::count_increments(x, u, side));
        }
    }
}

TEST(TrueJumps, Examples) {
    const std::vector<sim::Jump> j = {{0.1, 0.5}, {0.2, -0.3}, {0.3, 0.1}};
    EXPECT_EQ(counts::count_true_jumps(j, 0.25, 0.01), 2u);
    EXPECT_EQ(counts::count_true_jumps(j, 0.6, 0.01), 0u);
    EXPECT_THROW((void)counts::count_true_jumps(j, 0.005, 0.01), DomainError);
    sim::IncrementSeries no_record;
    EXPECT_THROW((void)counts::count_true_jumps(no_record, 0.1), DomainError);
}

TEST(TrueJumps, MeanMatchesIntegratedTail) {
    sim::ModelSpec m;
    m.components = {{{1.5, 1.0}}, {{0.6, 2.0}}};
    const sim::SamplingScheme scheme{1.0, 1e-3};
    const double u = 0.02;
    std::vector<double> v;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto s = sim::simulate_path(m, scheme, sim::JumpResolved{1e-3}, derive_seed(3, r));
        v.push_back(double(counts::count_true_jumps(s, u)));
    }
    EXPECT_NEAR(stats::mean(v), sim::integrated_tail(m, u, 1.0), 3 * stats::standard_error(v));
}

TEST(Discrepancy, NoGrowthAlongTheDeltaLadder) {
    // u_n = Delta^(2/11): u^(beta/2) |U - V| should not grow as Delta shrinks,
    // and u^(beta/2) (V - A(u)) should have a stable variance
    const double beta = 1.5;
    sim::ModelSpec m;
    m.components = {{{beta, 1.0}}};
    std::vector<double> level, stat, medians, spread, centered_var;
    const std::vector<double> deltas = {1e-3, 1e-4, 1e-5};
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const sim::SamplingScheme scheme{1.0, deltas[k]};
        const double u = std::pow(deltas[k], 2.0 / 11.0);
        const double scale = std::pow(u, beta / 2);
        std::vector<double> here, centered;
        for (std::uint64_t r = 0; r < 50; ++r) {
            const auto s = sim::simulate_path(m, scheme, sim::JumpResolved{u / 100}, derive_seed(77 + k, r));
            const double U = double(counts::count_increments(s.increments, u));
            const double V = double(counts::count_true_jumps(s, u));
            here.push_back(scale * std::abs(U - V));
            centered.push_back(scale * (V - sim::integrated_tail(m, u, 1.0)));
            level.push_back(double(k));
            stat.push_back(here.back());
        }
        medians.push_back(stats::median(here));
        spread.push_back(stats::stddev(here) / std::sqrt(50.0));
        centered_var.push_back(stats::variance(centered));
    }
    for (std::size_t k = 1; k < medians.size(); ++k) {
        EXPECT_LE(medians[k], medians[k - 1] + 2 * (spread[k] + spread[k - 1]));
    }
    EXPECT_GT(stats::spearman_increasing(level, stat).p_value, 0.05);
    const auto [lo, hi] = std::minmax_element(centered_var.begin(), centered_var.end());
    EXPECT_LE(*hi / *lo, 2.0);
}
