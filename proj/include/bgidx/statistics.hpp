#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bgidx::stats {

[[nodiscard]] double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator).
[[nodiscard]] double variance(std::span<const double> x);
[[nodiscard]] double stddev(std::span<const double> x);
[[nodiscard]] double median(std::span<const double> x);
/// Median absolute deviation from the median, unscaled.
[[nodiscard]] double mad(std::span<const double> x);
/// sqrt(mean((x - truth)^2)).
[[nodiscard]] double rmse(std::span<const double> x, double truth);
/// Standard error of the mean.
[[nodiscard]] double standard_error(std::span<const double> x);

/// Average ranks (1-based), ties share the mean rank.
[[nodiscard]] std::vector<double> ranks(std::span<const double> x);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
[[nodiscard]] double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value with the usual
/// effective-size correction).
[[nodiscard]] TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Spearman rank correlation; p_value is one-sided against a positive
/// correlation (t approximation with n - 2 degrees of freedom).
[[nodiscard]] TestResult spearman_increasing(std::span<const double> x,
                                             std::span<const double> y);

/// Pearson chi-square goodness of fit; dof = bins - 1 - fitted_parameters.
[[nodiscard]] TestResult chi_square(std::span<const double> observed,
                                    std::span<const double> expected,
                                    std::size_t fitted_parameters = 0);

/// Upper tail of the chi-square distribution.
[[nodiscard]] double chi_square_sf(double x, double dof);

}  // namespace bgidx::stats
