#pragma once

#include "bgidx/estimators.hpp"
#include "bgidx/fisher.hpp"
#include "bgidx/rational.hpp"

#include <array>
#include <optional>

namespace bgidx::rates {

/// Estimation error of order Delta^delta * log(1/Delta)^log.
struct RateExponents {
    double delta = 0.0;
    double log = 0.0;
};

struct OptimalRates {
    RateExponents beta1, a1, beta2, a2;
    est::Identifiability second = est::Identifiability::Identifiable;
};

/// Parametric-optimal rates implied by the Fisher information of the
/// Brownian plus two-stable model. The second pair is computed regardless and
/// flagged through `second`.
[[nodiscard]] OptimalRates optimal_rates(double beta1, double beta2);
[[nodiscard]] OptimalRates optimal_rates(const fisher::ParametricModel& model);

struct ExactRateExponents {
    Rational delta;
    Rational log;
};

struct ExactOptimalRates {
    ExactRateExponents beta1, a1, beta2, a2;
};

[[nodiscard]] ExactOptimalRates optimal_rates_exact(const Rational& beta1, const Rational& beta2);

/// Which formula gives the contrast-estimator exponent.
enum class Branch { Low, High };  // beta1 below / above (sqrt(97) - 1) / 6

[[nodiscard]] std::string_view to_string(Branch b);

/// (sqrt(97) - 1) / 6, the root of 3 b^2 + b - 8.
[[nodiscard]] double branch_point();

/// Supremum of admissible rho: min(1/(2+b), 2/(b(3+b)), 4/(b(5+3b))).
[[nodiscard]] double max_rho(double beta1);
[[nodiscard]] Rational max_rho_exact(const Rational& beta1);

struct RateComparison {
    std::array<double, 2> gamma{};        // optimal: (2 beta_i - beta1) / 4
    std::array<double, 2> gamma_prime{};  // contrast estimators at the largest rho
    double ratio = 0.0;                   // gamma'_i / gamma_i, same for i = 1, 2
    Branch branch = Branch::Low;
    double rho_max = 0.0;
    std::optional<double> rho;
    std::array<double, 2> realized{};  // 2 rho gamma_i when rho is given
    std::array<double, 2> slack{};     // gamma'_i - realized_i
    bool second_identifiable = true;
};

/// Exponents in Delta of the optimal and the contrast-estimator rates. When
/// `rho` is given it must satisfy 0 < rho < max_rho(beta1).
[[nodiscard]] RateComparison rate_comparison(double beta1, double beta2,
                                             std::optional<double> rho = std::nullopt);

struct ExactRateComparison {
    std::array<Rational, 2> gamma;
    std::array<Rational, 2> gamma_prime;
    Rational ratio;
    Branch branch = Branch::Low;
    Rational rho_max;
};

[[nodiscard]] ExactRateComparison rate_comparison_exact(const Rational& beta1,
                                                        const Rational& beta2);

/// gamma' / gamma evaluated at beta1 = 2 (the limit as beta1 -> 2): 4/11.
[[nodiscard]] Rational ratio_limit_at_two();

}  // namespace bgidx::rates
