#include "bgidx/simulate.hpp"

#include "bgidx/errors.hpp"
#include "bgidx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bgidx::sim {

namespace {

// Full-truncation Euler for the variance with compound-Poisson variance jumps.
class HestonStepper {
public:
    HestonStepper(const HestonJumpVolatility& vol, std::uint64_t seed)
        : vol_(vol),
          gauss_(derive_seed(seed, 0)),
          jumps_(derive_seed(seed, 1)),
          v_(vol.v0),
          rho_perp_(std::sqrt(1.0 - vol.rho_corr * vol.rho_corr)) {
        schedule_next_jump();
    }

    /// Advance by h; returns the increment of int sqrt(v^+) dW over the step.
    double step(double h) {
        const double vp = std::max(v_, 0.0);
        const double sqrt_h = std::sqrt(h);
        const double z1 = gauss_.normal();
        const double z2 = gauss_.normal();
        const double dw = sqrt_h * (vol_.rho_corr * z1 + rho_perp_ * z2);
        const double dx = std::sqrt(vp) * dw;
        v_ += vol_.kappa * (vol_.eta - vp) * h + vol_.gamma_vol * std::sqrt(vp) * sqrt_h * z1;
        t_ += h;
        while (next_jump_ < t_) {
            v_ += jumps_.uniform(-vol_.jump_half_width, vol_.jump_half_width);
            schedule_next_jump();
        }
        return dx;
    }

    [[nodiscard]] double variance() const { return std::max(v_, 0.0); }

private:
    void schedule_next_jump() {
        if (vol_.jump_intensity > 0.0) {
            next_jump_ += jumps_.exponential() / vol_.jump_intensity;
        } else {
            next_jump_ = std::numeric_limits<double>::infinity();
        }
    }

    HestonJumpVolatility vol_;
    Rng gauss_;
    Rng jumps_;
    double v_;
    double rho_perp_;
    double t_ = 0.0;
    double next_jump_ = 0.0;
};

void validate_vol(const VolatilitySpec& vol) {
    if (const auto* c = std::get_if<ConstantVolatility>(&vol)) {
        if (!(c->sigma >= 0.0)) {
            throw DomainError("volatility sigma must be nonnegative");
        }
        return;
    }
    const auto& h = std::get<HestonJumpVolatility>(vol);
    if (!(h.eta > 0.0) || !(h.kappa >= 0.0) || !(std::abs(h.rho_corr) <= 1.0) ||
        !(h.v0 >= 0.0) || !(h.gamma_vol >= 0.0) || !(h.jump_intensity >= 0.0) ||
        !(h.jump_half_width >= 0.0)) {
        throw DomainError(
            "Heston spec requires eta > 0, kappa >= 0, |rho| <= 1, v0 >= 0 and nonnegative "
            "vol-of-vol, jump intensity and jump width");
    }
}

void validate_mode(const SimulationMode& mode) {
    if (const auto* jr = std::get_if<JumpResolved>(&mode)) {
        if (!(jr->floor > 0.0)) {
            throw DomainError("jump-resolved simulation requires floor > 0");
        }
    }
}

void fill_continuous(const ModelSpec& model, const SamplingScheme& scheme, std::uint64_t seed,
                     std::size_t substeps, std::span<double> out) {
    const double delta = scheme.delta;
    const double drift = model.drift * delta;
    if (const auto* c = std::get_if<ConstantVolatility>(&model.vol)) {
        if (c->sigma == 0.0) {
            std::fill(out.begin(), out.end(), drift);
            return;
        }
        Rng rng(seed);
        const double sd = c->sigma * std::sqrt(delta);
        for (double& x : out) {
            x = drift + sd * rng.normal();
        }
        return;
    }
    HestonStepper stepper(std::get<HestonJumpVolatility>(model.vol), seed);
    const double h = delta / static_cast<double>(substeps);
    for (double& x : out) {
        double dx = 0.0;
        for (std::size_t s = 0; s < substeps; ++s) {
            dx += stepper.step(h);
        }
        x = drift + dx;
    }
}

}  // namespace

double long_run_variance(const VolatilitySpec& vol) {
    if (const auto* c = std::get_if<ConstantVolatility>(&vol)) {
        return c->sigma * c->sigma;
    }
    return std::get<HestonJumpVolatility>(vol).eta;
}

void ModelSpec::validate() const {
    validate_vol(vol);
    for (std::size_t i = 0; i < components.size(); ++i) {
        components[i].law.validate();
        if (i > 0 && !(components[i].law.beta < components[i - 1].law.beta)) {
            throw DomainError("jump component indices must be strictly decreasing");
        }
    }
}

std::size_t SamplingScheme::n() const {
    return static_cast<std::size_t>(std::floor(horizon / delta + 1e-9));
}

void SamplingScheme::validate() const {
    if (!(delta > 0.0) || !(horizon > 0.0)) {
        throw DomainError("sampling scheme requires delta > 0 and horizon > 0");
    }
    if (n() < 1) {
        throw DomainError("sampling scheme has no increments (horizon < delta)");
    }
}

SamplingScheme SamplingScheme::with_count(std::size_t n, double delta) {
    return SamplingScheme{static_cast<double>(n) * delta, delta};
}

std::uint64_t volatility_seed(std::uint64_t seed) { return derive_seed(seed, 0); }

std::uint64_t component_seed(std::uint64_t seed, std::size_t index) {
    return derive_seed(seed, 1 + index);
}

void add_component(const stable::StableLaw& law, const SamplingScheme& scheme,
                   const SimulationMode& mode, std::uint64_t stream_seed,
                   std::span<double> accumulator, std::vector<Jump>* jumps) {
    law.validate();
    validate_mode(mode);
    const std::size_t n = scheme.n();
    if (accumulator.size() != n) {
        throw DomainError("accumulator length does not match the sampling scheme");
    }
    const double delta = scheme.delta;
    const double beta = law.beta;
    const double a = law.tail_intensity;

    if (std::holds_alternative<ExactIncrements>(mode)) {
        Rng rng(stream_seed);
        const double scale = stable::increment_scale(law, delta);
        for (double& x : accumulator) {
            x += scale * stable::sample_standard(beta, rng);
        }
        return;
    }

    const double floor = std::get<JumpResolved>(mode).floor;
    // Asmussen-Rosinski: sigma(eps)^2 = int_{|x|<=eps} x^2 F(dx) = a beta eps^(2-beta)/(2-beta)
    const double small_var_rate = a * beta * std::pow(floor, 2.0 - beta) / (2.0 - beta);
    const double ratio = std::sqrt(small_var_rate) / floor;
    if (ratio < 5.0) {
        throw DomainError("jump-resolved floor too coarse: sigma(floor)/floor = " +
                          std::to_string(ratio) + " < 5");
    }
    Rng small(derive_seed(stream_seed, 0));
    const double sd = std::sqrt(small_var_rate * delta);
    for (double& x : accumulator) {
        x += sd * small.normal();
    }

    Rng big(derive_seed(stream_seed, 1));
    const double rate = a / std::pow(floor, beta);
    const double end = static_cast<double>(n) * delta;
    double t = 0.0;
    while (true) {
        t += big.exponential() / rate;
        if (t >= end) {
            break;
        }
        const double magnitude = floor * std::pow(big.uniform(), -1.0 / beta);
        const double size = big.uniform() < 0.5 ? -magnitude : magnitude;
        const auto k = std::min(n - 1, static_cast<std::size_t>(t / delta));
        accumulator[k] += size;
        if (jumps != nullptr) {
            jumps->push_back({t, size});
        }
    }
}

IncrementSeries simulate_path(const ModelSpec& model, const SamplingScheme& scheme,
                              const SimulationMode& mode, std::uint64_t seed,
                              std::size_t substeps) {
    model.validate();
    scheme.validate();
    validate_mode(mode);
    if (substeps < 1) {
        throw DomainError("substeps must be at least 1");
    }
    IncrementSeries series;
    series.delta = scheme.delta;
    series.increments.resize(scheme.n());
    fill_continuous(model, scheme, volatility_seed(seed), substeps, series.increments);

    const bool resolved = std::holds_alternative<JumpResolved>(mode);
    std::vector<Jump> jumps;
    for (std::size_t i = 0; i < model.components.size(); ++i) {
        add_component(model.components[i].law, scheme, mode, component_seed(seed, i),
                      series.increments, resolved ? &jumps : nullptr);
    }
    if (resolved) {
        std::stable_sort(jumps.begin(), jumps.end(),
                         [](const Jump& l, const Jump& r) { return l.time < r.time; });
        series.jump_record = std::move(jumps);
        series.floor = std::get<JumpResolved>(mode).floor;
    }
    return series;
}

std::vector<double> variance_path(const HestonJumpVolatility& vol, const SamplingScheme& scheme,
                                  std::uint64_t seed, std::size_t substeps) {
    validate_vol(vol);
    scheme.validate();
    if (substeps < 1) {
        throw DomainError("substeps must be at least 1");
    }
    HestonStepper stepper(vol, volatility_seed(seed));
    const double h = scheme.delta / static_cast<double>(substeps);
    std::vector<double> path(scheme.n());
    for (double& v : path) {
        for (std::size_t s = 0; s < substeps; ++s) {
            (void)stepper.step(h);
        }
        v = stepper.variance();
    }
    return path;
}

double integrated_tail(const ModelSpec& model, double u, double t) {
    if (!(u > 0.0) || !(t >= 0.0)) {
        throw DomainError("integrated_tail requires u > 0 and t >= 0");
    }
    double sum = 0.0;
    for (const auto& c : model.components) {
        sum += c.law.tail_intensity / std::pow(u, c.law.beta);
    }
    return t * sum;
}

}  // namespace bgidx::sim
