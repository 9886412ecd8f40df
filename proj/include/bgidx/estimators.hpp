#pragma once

#include "bgidx/counts.hpp"
#include "bgidx/simulate.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace bgidx::est {

// ---------------------------------------------------------------------------
// Truncation levels
// ---------------------------------------------------------------------------

/// u_n = K * delta^rho.
struct TheoryThreshold {
    double K = 1.0;
};

/// u_n = alpha * sqrt(eta * delta). Without `eta`, the continuous variance is
/// estimated from the data by truncated realized variance.
struct PracticalThreshold {
    double alpha = 7.0;
    std::optional<double> eta;
};

struct ExplicitThreshold {
    double u = 0.0;
};

using ThresholdRule = std::variant<TheoryThreshold, PracticalThreshold, ExplicitThreshold>;

struct PrelimConfig {
    std::size_t j = 2;
    double gamma = 2.0;
    double epsilon = 0.1;
    double rho = 2.0 / 11.0;
    ThresholdRule threshold = TheoryThreshold{};
    counts::Side side = counts::Side::Absolute;
    bool allow_large_rho = false;  // permit rho > 2/11

    void validate() const;
};

/// Truncation level u_n for `scheme`. Practical mode without a known eta
/// needs the increments to estimate it.
[[nodiscard]] double default_threshold(const sim::SamplingScheme& scheme,
                                       const PrelimConfig& config,
                                       std::span<const double> increments = {});

/// Truncated realized variance per unit time: iterated with cutoff 4 sqrt(v delta),
/// started from bipower variation.
[[nodiscard]] double estimate_continuous_variance(std::span<const double> increments,
                                                  double delta);

/// u_{n,i} = u_n^((epsilon/2)^(i-1)), i = 1..j. Requires 0 < u_n < 1.
[[nodiscard]] std::vector<double> aux_thresholds(double u_n, double epsilon, std::size_t j);

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

enum class Status { Ok, Clipped, Failed };

[[nodiscard]] std::string_view to_string(Status s);

struct IndexEstimate {
    double beta = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    Status status = Status::Failed;

    [[nodiscard]] bool usable() const { return status != Status::Failed; }
};

struct OptimizerDiagnostics {
    std::size_t starts = 0;
    std::size_t converged_starts = 0;
    std::size_t best_start = 0;
    std::size_t iterations = 0;    // of the selected start
    std::size_t evaluations = 0;   // over all starts
    double start_contrast = 0.0;   // contrast at the selected start point
    bool converged = false;
};

struct EstimateSet {
    std::vector<IndexEstimate> entries;
    double u_n = 0.0;
    std::vector<double> thresholds;  // u_{n,i} (preliminary) or v_l u_n (final)
    counts::Side side = counts::Side::Absolute;
    std::optional<double> contrast;
    std::optional<OptimizerDiagnostics> optimizer;

    [[nodiscard]] std::size_t usable_count() const;
};

/// Exceedance count as a function of the threshold.
using CountFunction = std::function<double(double)>;

/// Preliminary log-ratio estimators from an arbitrary count function.
[[nodiscard]] EstimateSet preliminary_from_counts(const CountFunction& count, double u_n,
                                                  const PrelimConfig& config);

/// Preliminary estimators on observed increments.
[[nodiscard]] EstimateSet preliminary_estimate(const sim::IncrementSeries& series,
                                               const sim::SamplingScheme& scheme,
                                               const PrelimConfig& config);

/// Negative intensities clipped to 0; usable entries reordered so beta is
/// decreasing (intensities follow their index); failed entries go last.
[[nodiscard]] EstimateSet sanitize(EstimateSet est);

/// Number of leading indices kept by the rule "stop at the first i with
/// beta_i <= epsilon + beta_1 / 2" (failures count as stops).
[[nodiscard]] std::size_t stop_rule(const EstimateSet& est, double epsilon);

/// Asymptotic bias constant H_i of the preliminary estimator (1-based i, 1 <= i < j).
[[nodiscard]] double bias_constant(std::span<const double> betas,
                                   std::span<const double> intensities, std::size_t i,
                                   double gamma);

// ---------------------------------------------------------------------------
// Contrast estimator
// ---------------------------------------------------------------------------

/// Optional box around the preliminary estimates.
struct BoxHalfWidths {
    double beta = 0.1;
    double gamma = std::numeric_limits<double>::infinity();
};

struct ContrastConfig {
    std::vector<double> v_grid;   // 1 = v_1 < ... < v_L
    std::vector<double> weights;  // empty means all ones
    double tolerance = 1e-8;
    std::size_t max_iterations = 500;
    std::size_t multistarts = 8;
    std::optional<BoxHalfWidths> box;

    ContrastConfig();
    void validate(std::size_t j) const;
    [[nodiscard]] std::vector<double> effective_weights() const;
};

/// {7, 10, 15, 20, 30, 40, 60, 80, 90, 120} / 7.
[[nodiscard]] std::vector<double> default_v_grid();

/// w_l = 1 / v_l.
[[nodiscard]] std::vector<double> decreasing_weights(std::span<const double> v_grid);

/// Counts at thresholds v_l u_n, real-valued so that noiseless synthetic
/// curves can be represented exactly.
struct ContrastData {
    std::vector<double> thresholds;
    std::vector<double> counts;

    [[nodiscard]] static ContrastData from(const counts::TailCountCurve& curve);
    [[nodiscard]] double u_n() const { return thresholds.front(); }
};

struct PowerTerm {
    double exponent = 0.0;
    double intensity = 0.0;
};

/// sum_l w_l (U_l - sum_i gamma_i / (v_l u_n)^x_i)^2.
/// Exponents must lie in [0, 2] and intensities be nonnegative.
[[nodiscard]] double contrast_value(const ContrastData& data, const ContrastConfig& config,
                                    std::span<const PowerTerm> params);
[[nodiscard]] double contrast_value(const counts::TailCountCurve& curve,
                                    const ContrastConfig& config,
                                    std::span<const PowerTerm> params);

/// Intensities minimizing the contrast for fixed exponents, subject to gamma >= 0.
/// Throws RankDeficientError when the design (v_l u_n)^(-x_i) is rank deficient.
[[nodiscard]] std::vector<double> profile_gammas(const ContrastData& data,
                                                 const ContrastConfig& config,
                                                 std::span<const double> exponents);

/// Thresholds v_l * u_n.
[[nodiscard]] std::vector<double> contrast_thresholds(double u_n, const ContrastConfig& config);

/// Final estimators: multistart Nelder-Mead over ordered exponents with the
/// intensities profiled out. Entries are Failed when no start converged.
[[nodiscard]] EstimateSet final_estimate_from_data(const ContrastData& data,
                                                   const EstimateSet& prelim,
                                                   const ContrastConfig& config);

[[nodiscard]] EstimateSet final_estimate(const sim::IncrementSeries& series,
                                         const sim::SamplingScheme& scheme,
                                         const EstimateSet& prelim,
                                         const ContrastConfig& config);

// ---------------------------------------------------------------------------
// Identifiability
// ---------------------------------------------------------------------------

enum class Identifiability { Identifiable, Boundary, NotIdentifiable };

[[nodiscard]] std::string_view to_string(Identifiability s);

/// Index 1 is always identifiable; index i >= 2 is identifiable when
/// beta_i > beta_1 / 2 and on the boundary when equal.
[[nodiscard]] std::vector<Identifiability> identifiable_indices(std::span<const double> betas);

}  // namespace bgidx::est
