#include "bgidx/rates.hpp"

#include "bgidx/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bgidx::rates {

namespace {

void check_pair(double b1, double b2) {
    if (!(b2 > 0.0 && b2 < b1 && b1 < 2.0)) {
        throw DomainError("indices must satisfy 0 < beta2 < beta1 < 2");
    }
}

void check_pair(const Rational& b1, const Rational& b2) {
    if (!(b2 > Rational(0) && b2 < b1 && b1 <= Rational(2))) {
        throw DomainError("indices must satisfy 0 < beta2 < beta1 <= 2");
    }
}

Branch branch_of(const Rational& b1) {
    // beta1 <= (sqrt(97) - 1) / 6  <=>  3 b^2 + b - 8 <= 0 for b > 0
    return Rational(3) * b1 * b1 + b1 - Rational(8) <= Rational(0) ? Branch::Low : Branch::High;
}

Rational ratio_exact(const Rational& b1) {
    return branch_of(b1) == Branch::Low ? Rational(2) / (Rational(2) + b1)
                                        : Rational(8) / (Rational(5) * b1 + Rational(3) * b1 * b1);
}

}  // namespace

OptimalRates optimal_rates(double b1, double b2) {
    check_pair(b1, b2);
    OptimalRates r;
    r.beta1 = {b1 / 4.0, -(1.0 - b1 / 4.0)};
    r.a1 = {b1 / 4.0, b1 / 4.0};
    const double e2 = b2 / 2.0 - b1 / 4.0;
    r.beta2 = {e2, -(1.0 - b2 / 2.0 + b1 / 4.0)};
    r.a2 = {e2, e2};
    const double betas[] = {b1, b2};
    r.second = est::identifiable_indices(betas)[1];
    return r;
}

OptimalRates optimal_rates(const fisher::ParametricModel& model) {
    model.validate();
    return optimal_rates(model.beta1, model.beta2);
}

ExactOptimalRates optimal_rates_exact(const Rational& b1, const Rational& b2) {
    check_pair(b1, b2);
    const Rational q1 = b1 / Rational(4);
    const Rational e2 = b2 / Rational(2) - q1;
    ExactOptimalRates r;
    r.beta1 = {q1, -(Rational(1) - q1)};
    r.a1 = {q1, q1};
    r.beta2 = {e2, -(Rational(1) - e2)};
    r.a2 = {e2, e2};
    return r;
}

std::string_view to_string(Branch b) { return b == Branch::Low ? "low" : "high"; }

double branch_point() { return (std::sqrt(97.0) - 1.0) / 6.0; }

double max_rho(double b1) {
    if (!(b1 > 0.0 && b1 < 2.0)) {
        throw DomainError("beta1 must lie in (0, 2)");
    }
    return std::min({1.0 / (2.0 + b1), 2.0 / (b1 * (3.0 + b1)), 4.0 / (b1 * (5.0 + 3.0 * b1))});
}

Rational max_rho_exact(const Rational& b1) {
    if (!(b1 > Rational(0) && b1 <= Rational(2))) {
        throw DomainError("beta1 must lie in (0, 2]");
    }
    return std::min({Rational(1) / (Rational(2) + b1), Rational(2) / (b1 * (Rational(3) + b1)),
                      Rational(4) / (b1 * (Rational(5) + Rational(3) * b1))});
}

RateComparison rate_comparison(double b1, double b2, std::optional<double> rho) {
    check_pair(b1, b2);
    RateComparison r;
    r.rho_max = max_rho(b1);
    r.branch = 3.0 * b1 * b1 + b1 - 8.0 <= 0.0 ? Branch::Low : Branch::High;
    r.ratio = r.branch == Branch::Low ? 2.0 / (2.0 + b1) : 8.0 / (5.0 * b1 + 3.0 * b1 * b1);
    const double betas[] = {b1, b2};
    for (std::size_t i = 0; i < 2; ++i) {
        r.gamma[i] = (2.0 * betas[i] - b1) / 4.0;
        r.gamma_prime[i] = r.gamma[i] * r.ratio;
    }
    r.second_identifiable = b2 > b1 / 2.0;
    if (rho) {
        if (!(*rho > 0.0 && *rho < r.rho_max)) {
            throw DomainError("rho must satisfy 0 < rho < " + std::to_string(r.rho_max));
        }
        r.rho = rho;
        for (std::size_t i = 0; i < 2; ++i) {
            r.realized[i] = 2.0 * *rho * r.gamma[i];
            r.slack[i] = r.gamma_prime[i] - r.realized[i];
        }
    }
    return r;
}

ExactRateComparison rate_comparison_exact(const Rational& b1, const Rational& b2) {
    check_pair(b1, b2);
    ExactRateComparison r;
    r.branch = branch_of(b1);
    r.ratio = ratio_exact(b1);
    r.rho_max = max_rho_exact(b1);
    const Rational betas[] = {b1, b2};
    for (std::size_t i = 0; i < 2; ++i) {
        r.gamma[i] = (Rational(2) * betas[i] - b1) / Rational(4);
        r.gamma_prime[i] = r.gamma[i] * r.ratio;
    }
    return r;
}

Rational ratio_limit_at_two() { return ratio_exact(Rational(2)); }

}  // namespace bgidx::rates
