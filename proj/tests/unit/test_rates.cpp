#include "bgidx/errors.hpp"
#include "bgidx/rates.hpp"
#include "bgidx/rational.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace bgidx;

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(Rational::parse("3"), Rational(3));
    EXPECT_EQ(Rational::parse("-0.75"), Rational(-3, 4));
    EXPECT_EQ(Rational::parse("1.0"), Rational(1));
    EXPECT_EQ(Rational::parse("3/4"), Rational(3, 4));
    EXPECT_EQ(Rational::parse("6/8").str(), "3/4");
    EXPECT_EQ(Rational(4, -2).str(), "-2");
    EXPECT_THROW((void)Rational::parse("abc"), DomainError);
    EXPECT_THROW((void)Rational::parse("1/0"), DomainError);
    std::ostringstream os;
    os << Rational(7, 12);
    EXPECT_EQ(os.str(), "7/12");
}

TEST(Rational, Arithmetic) {
    const Rational a(1, 3), b(1, 6);
    EXPECT_EQ(a + b, Rational(1, 2));
    EXPECT_EQ(a - b, Rational(1, 6));
    EXPECT_EQ(a * b, Rational(1, 18));
    EXPECT_EQ(a / b, Rational(2));
    EXPECT_EQ(-a, Rational(-1, 3));
    EXPECT_LT(b, a);
    EXPECT_DOUBLE_EQ(Rational(3, 8).to_double(), 0.375);
    EXPECT_THROW((void)(a / Rational(0)), DomainError);
    const Rational big(std::int64_t{1} << 62, 1);
    EXPECT_THROW((void)(big * big), NumericalError);
}

TEST(OptimalRates, Examples) {
    const auto r = rates::optimal_rates(1.0, 0.75);
    EXPECT_DOUBLE_EQ(r.beta1.delta, 0.25);
    EXPECT_DOUBLE_EQ(r.a1.delta, 0.25);
    EXPECT_DOUBLE_EQ(r.beta2.delta, 0.125);
    EXPECT_DOUBLE_EQ(r.a2.delta, 0.125);
    EXPECT_DOUBLE_EQ(r.beta1.log, -0.75);
    EXPECT_DOUBLE_EQ(r.a1.log, 0.25);
    EXPECT_DOUBLE_EQ(r.beta2.log, -0.875);
    EXPECT_DOUBLE_EQ(r.a2.log, 0.125);
    EXPECT_EQ(r.second, est::Identifiability::Identifiable);

    const auto edge = rates::optimal_rates(1.0, 0.5);
    EXPECT_DOUBLE_EQ(edge.beta2.delta, 0.0);
    EXPECT_EQ(edge.second, est::Identifiability::Boundary);
    EXPECT_EQ(rates::optimal_rates(1.6, 0.7).second, est::Identifiability::NotIdentifiable);
}

TEST(OptimalRates, ExactAgreesWithFloatingPoint) {
    for (auto [b1, b2] : {std::pair{"1", "3/4"}, {"3/2", "1"}, {"1.9", "1.2"}, {"7/10", "1/2"}}) {
        const auto e = rates::optimal_rates_exact(Rational::parse(b1), Rational::parse(b2));
        const auto f = rates::optimal_rates(Rational::parse(b1).to_double(),
                                            Rational::parse(b2).to_double());
        EXPECT_NEAR(e.beta1.delta.to_double(), f.beta1.delta, 1e-15);
        EXPECT_NEAR(e.beta2.delta.to_double(), f.beta2.delta, 1e-15);
        EXPECT_NEAR(e.beta2.log.to_double(), f.beta2.log, 1e-15);
        EXPECT_NEAR(e.a2.log.to_double(), f.a2.log, 1e-15);
    }
    EXPECT_EQ(rates::optimal_rates_exact(Rational(1), Rational(3, 4)).beta2.delta, Rational(1, 8));
}

TEST(OptimalRates, MatchFisherExponents) {
    // error of order (n I)^(-1/2) with n = T / Delta
    fisher::ParametricModel m;
    const auto r = rates::optimal_rates(m);
    for (auto [p, rate] : {std::pair{fisher::Parameter::Beta1, r.beta1},
                           {fisher::Parameter::A1, r.a1},
                           {fisher::Parameter::Beta2, r.beta2},
                           {fisher::Parameter::A2, r.a2}}) {
        const auto th = fisher::theoretical_exponents(m, p);
        EXPECT_DOUBLE_EQ(rate.delta, (1.0 - th.delta) / 2.0);
        EXPECT_DOUBLE_EQ(rate.log, -th.log / 2.0);
    }
}

TEST(RateComparison, LowBranchAtOne) {
    const auto c = rates::rate_comparison(1.0, 0.75);
    EXPECT_DOUBLE_EQ(c.gamma[0], 0.25);
    EXPECT_DOUBLE_EQ(c.gamma_prime[0], 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(c.gamma[1], 0.125);
    EXPECT_NEAR(c.gamma_prime[1] / c.gamma[1], c.gamma_prime[0] / c.gamma[0], 1e-15);
    EXPECT_EQ(c.branch, rates::Branch::Low);
    EXPECT_NEAR(c.ratio, 2.0 / 3.0, 1e-15);

    const auto e = rates::rate_comparison_exact(Rational(1), Rational(3, 4));
    EXPECT_EQ(e.gamma[0], Rational(1, 4));
    EXPECT_EQ(e.gamma_prime[0], Rational(1, 6));
    EXPECT_EQ(e.gamma_prime[1], Rational(1, 12));
    EXPECT_EQ(e.ratio, Rational(2, 3));
    EXPECT_EQ(e.rho_max, Rational(1, 3));
}

TEST(RateComparison, BranchPointAndLimit) {
    EXPECT_NEAR(rates::branch_point(), (std::sqrt(97.0) - 1.0) / 6.0, 1e-15);
    EXPECT_NEAR(rates::branch_point(), 1.475, 5e-4);
    const double bp = rates::branch_point();
    EXPECT_EQ(rates::rate_comparison(bp - 1e-9, 0.9).branch, rates::Branch::Low);
    EXPECT_EQ(rates::rate_comparison(bp + 1e-9, 0.9).branch, rates::Branch::High);
    // continuous across the branch point
    EXPECT_NEAR(rates::rate_comparison(bp - 1e-9, 0.9).ratio,
                rates::rate_comparison(bp + 1e-9, 0.9).ratio, 1e-8);
    EXPECT_EQ(rates::ratio_limit_at_two(), Rational(4, 11));
    EXPECT_NEAR(rates::rate_comparison(1.999999, 1.5).ratio, 4.0 / 11.0, 1e-6);
    // ratio decreases in beta1
    double prev = 1.0;
    for (double b = 0.1; b < 2.0; b += 0.1) {
        const double r = rates::rate_comparison(b, b * 0.75).ratio;
        EXPECT_LT(r, prev);
        prev = r;
    }
    const auto high = rates::rate_comparison_exact(Rational(3, 2), Rational(1));
    EXPECT_EQ(high.branch, rates::Branch::High);
    EXPECT_EQ(high.ratio, Rational(8) / (Rational(15, 2) + Rational(27, 4)));
}

TEST(RateComparison, RealizedRatesAndSlack) {
    const auto c = rates::rate_comparison(1.0, 0.75, 0.15);
    ASSERT_TRUE(c.rho.has_value());
    EXPECT_DOUBLE_EQ(c.realized[0], 2 * 0.15 * 0.25);
    EXPECT_DOUBLE_EQ(c.slack[0], 1.0 / 6.0 - 0.075);
    EXPECT_GT(c.slack[1], 0.0);
    EXPECT_THROW((void)rates::rate_comparison(1.0, 0.75, 0.4), DomainError);
    EXPECT_THROW((void)rates::rate_comparison(1.0, 0.75, 0.0), DomainError);
}

TEST(MaxRho, MiddleTermNeverBinds) {
    for (double b = 0.05; b < 2.0; b += 0.01) {
        const double m = rates::max_rho(b);
        EXPECT_LE(m, 2.0 / (b * (3.0 + b)));
        EXPECT_DOUBLE_EQ(m, std::min(1.0 / (2.0 + b), 4.0 / (b * (5.0 + 3.0 * b))));
    }
    EXPECT_EQ(rates::max_rho_exact(Rational(2)), Rational(4, 22));
    EXPECT_EQ(rates::max_rho_exact(Rational(1)), Rational(1, 3));
}
