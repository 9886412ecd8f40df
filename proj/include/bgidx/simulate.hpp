#pragma once

#include "bgidx/stable.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace bgidx::sim {

/// Seconds in one trading day (6.5 hours).
inline constexpr double kSecondsPerDay = 23400.0;
inline constexpr double kTradingDaysPerYear = 252.0;

struct ConstantVolatility {
    double sigma = 0.0;
};

/// Square-root variance with compound-Poisson variance jumps:
/// dv = kappa (eta - v) dt + gamma_vol sqrt(v) dB + dJ, corr(dW, dB) = rho_corr,
/// J has rate jump_intensity and marks uniform on [-jump_half_width, jump_half_width].
struct HestonJumpVolatility {
    double kappa = 5.0;
    double eta = 0.0625;
    double gamma_vol = 0.5;
    double rho_corr = -0.5;
    double v0 = 0.0625;
    double jump_intensity = 10.0;
    double jump_half_width = 0.3;
};

using VolatilitySpec = std::variant<ConstantVolatility, HestonJumpVolatility>;

/// Long-run variance of the continuous part (sigma^2 or eta).
[[nodiscard]] double long_run_variance(const VolatilitySpec& vol);

/// Stable jump term with a constant unit loading.
struct JumpComponent {
    stable::StableLaw law;
};

struct ModelSpec {
    double drift = 0.0;
    VolatilitySpec vol = ConstantVolatility{};
    std::vector<JumpComponent> components;  // strictly decreasing beta
    double x0 = 0.0;

    void validate() const;
};

struct SamplingScheme {
    double horizon = 1.0;
    double delta = 1e-3;

    /// floor(horizon / delta), guarded against representation error.
    [[nodiscard]] std::size_t n() const;
    void validate() const;

    /// Scheme with exactly `n` increments of size `delta`.
    [[nodiscard]] static SamplingScheme with_count(std::size_t n, double delta);
};

struct Jump {
    double time = 0.0;
    double size = 0.0;
};

struct IncrementSeries {
    double delta = 0.0;
    std::vector<double> increments;
    std::optional<std::vector<Jump>> jump_record;  // sorted by time, |size| > floor
    double floor = 0.0;                            // 0 when no jumps were recorded
};

/// Each stable increment drawn exactly in law.
struct ExactIncrements {};

/// Jumps above `floor` simulated individually and recorded; the rest replaced
/// by a Gaussian of matching variance.
struct JumpResolved {
    double floor = 1e-4;
};

using SimulationMode = std::variant<ExactIncrements, JumpResolved>;

/// Stream seeds. Component i of a model simulated under `seed` uses
/// component_seed(seed, i); the continuous part uses volatility_seed(seed).
[[nodiscard]] std::uint64_t volatility_seed(std::uint64_t seed);
[[nodiscard]] std::uint64_t component_seed(std::uint64_t seed, std::size_t index);

/// Simulate the increments of `model` on `scheme`. Same arguments give a
/// bit-identical series. `substeps` refines the variance Euler scheme.
[[nodiscard]] IncrementSeries simulate_path(const ModelSpec& model, const SamplingScheme& scheme,
                                            const SimulationMode& mode, std::uint64_t seed,
                                            std::size_t substeps = 1);

/// Add one component's increments to `accumulator` (size scheme.n()) and
/// append its jumps (if jump-resolved) to `jumps`. simulate_path is built from
/// this, so summing separately simulated components reproduces a full path.
void add_component(const stable::StableLaw& law, const SamplingScheme& scheme,
                   const SimulationMode& mode, std::uint64_t stream_seed,
                   std::span<double> accumulator, std::vector<Jump>* jumps);

/// Variance path v^+ at the end of each observation interval (length n).
[[nodiscard]] std::vector<double> variance_path(const HestonJumpVolatility& vol,
                                                const SamplingScheme& scheme,
                                                std::uint64_t seed, std::size_t substeps = 1);

/// Integrated jump tail t * sum_i a_i / u^beta_i.
[[nodiscard]] double integrated_tail(const ModelSpec& model, double u, double t);

/// Binary increment dump: magic "BGINCR01", uint64 n, float64 delta, then n
/// float64 increments. All little-endian.
void write_increments(std::ostream& out, const IncrementSeries& series);
[[nodiscard]] IncrementSeries read_increments(std::istream& in);

}  // namespace bgidx::sim
