#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bgidx::fisher {

/// X_t = b t + sqrt(c) W_t + Y^1_t + Y^2_t with symmetric stable Y^i whose
/// Levy densities are a_i beta_i / |x|^(1 + beta_i). a_i = 0 switches a
/// component off.
struct ParametricModel {
    double b = 0.0;
    double c = 0.1;
    double beta1 = 1.0;
    double a1 = 0.5;
    double beta2 = 0.75;
    double a2 = 0.2;

    void validate() const;
};

enum class Parameter { Beta1, A1, Beta2, A2 };

inline constexpr std::array<Parameter, 4> kAllParameters = {Parameter::Beta1, Parameter::A1,
                                                            Parameter::Beta2, Parameter::A2};

[[nodiscard]] std::string_view to_string(Parameter p);

/// psi(u) = i u b - c u^2 / 2 - a1 C(beta1) |u|^beta1 - a2 C(beta2) |u|^beta2.
[[nodiscard]] std::complex<double> char_exponent(const ParametricModel& model, double u);

/// d/dtheta of Re psi(u) (b is not a parameter, so Im psi does not move).
[[nodiscard]] double char_exponent_derivative(const ParametricModel& model, Parameter which,
                                              double u);

struct GridSpec {
    std::size_t N = std::size_t{1} << 18;  // power of two
    std::optional<double> half_width;      // minimum half-width of the x window
    double frequency_margin = 1.25;        // u_max / u*, u* where Delta |Re psi| = 37
};

/// Density of X_Delta at x = center + k dx, k = 0..N/2 (the law is symmetric
/// about center = b Delta). Periodic images of the heavy tails are removed
/// analytically.
struct DensityGrid {
    double center = 0.0;
    double dx = 0.0;
    std::size_t N = 0;
    std::vector<double> half;  // floored at 1e-300
    double window_mass = 0.0;  // trapezoid integral over [center - X, center + X]
    double tail_mass = 0.0;    // 2 Delta sum a_i X^(-beta_i), beyond the window
    double u_max = 0.0;
    std::size_t doublings = 0;

    [[nodiscard]] double half_width() const { return dx * static_cast<double>(half.size() - 1); }
    [[nodiscard]] double x(std::size_t k) const { return center + dx * static_cast<double>(k); }
    /// window_mass + tail_mass.
    [[nodiscard]] double captured_mass() const { return window_mass + tail_mass; }
};

[[nodiscard]] DensityGrid density_grid(const ParametricModel& model, double delta,
                                       const GridSpec& grid = {});

enum class ScoreMethod { Analytic, FiniteDifference };

/// d p_Delta / d theta on the points of `grid`. Analytic differentiates psi
/// under the inversion integral; FiniteDifference takes central differences
/// with step 1e-4 (relative for the intensities).
[[nodiscard]] std::vector<double> density_derivative(const ParametricModel& model, double delta,
                                                     Parameter which, ScoreMethod method,
                                                     const DensityGrid& grid);

struct FisherEntry {
    Parameter which = Parameter::Beta1;
    double value = 0.0;          // analytic score
    double value_fd = 0.0;       // finite-difference score
    double score_rel_l2 = 0.0;   // ||dp_an - dp_fd|| / ||dp_an|| on the grid
    double far_tail = 0.0;       // part of `value` from |x - center| > X
    bool accurate = false;       // score_rel_l2 <= 1e-3
};

struct FisherResult {
    double delta = 0.0;
    std::array<FisherEntry, 4> entries{};
    double window_mass = 0.0;
    double tail_mass = 0.0;
    double captured_mass = 0.0;
    double half_width = 0.0;
    std::size_t N = 0;
    bool accurate = false;  // all cross-checks and |captured_mass - 1| <= 1e-6

    [[nodiscard]] const FisherEntry& get(Parameter p) const;
};

/// I_Delta^{theta theta} = int (d_theta p)^2 / p dx.
[[nodiscard]] double fisher_diagonal(const ParametricModel& model, double delta, Parameter which,
                                     ScoreMethod method = ScoreMethod::Analytic,
                                     const GridSpec& grid = {});

/// All four diagonal entries with the analytic / finite-difference cross-check.
[[nodiscard]] FisherResult fisher_information(const ParametricModel& model, double delta,
                                              const GridSpec& grid = {});

/// Ladder of fisher_information over `deltas`, evaluated on up to `jobs` threads.
[[nodiscard]] std::vector<FisherResult> fisher_ladder(const ParametricModel& model,
                                                      std::span<const double> deltas,
                                                      std::size_t jobs = 1,
                                                      const GridSpec& grid = {});

/// Information for an arbitrary parameter given d/dtheta Re psi(u). When the
/// parameter moves the Levy density, also pass d/dtheta nu(z) and its tail
/// integral int_z^inf (used for the image correction and the far tail).
struct CustomParameter {
    std::function<double(double)> d_exponent;
    std::function<double(double)> d_levy_density;
    std::function<double(double)> d_levy_tail;
};

[[nodiscard]] double fisher_information_custom(const ParametricModel& model, double delta,
                                               const CustomParameter& param,
                                               const GridSpec& grid = {});

/// Exponents of Delta and log(1/Delta) in the small-Delta equivalent of I^{theta theta}.
struct TheoryExponents {
    double delta = 0.0;
    double log = 0.0;
};

[[nodiscard]] TheoryExponents theoretical_exponents(const ParametricModel& model, Parameter which);

struct SlopeFit {
    double exponent = 0.0;      // of Delta
    double log_exponent = 0.0;  // of log(1/Delta), fixed or fitted
    double intercept = 0.0;
};

/// Regress log I - kappa log log(1/Delta) on log Delta with kappa fixed.
[[nodiscard]] SlopeFit fit_exponent(std::span<const double> deltas,
                                    std::span<const double> values, double log_exponent);

/// Fit log I = alpha log Delta + kappa log log(1/Delta) + const jointly.
[[nodiscard]] SlopeFit fit_exponent_joint(std::span<const double> deltas,
                                          std::span<const double> values);

}  // namespace bgidx::fisher
