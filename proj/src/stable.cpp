#include "bgidx/stable.hpp"

#include "bgidx/errors.hpp"
#include "bgidx/quadrature.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

namespace bgidx::stable {

namespace {

constexpr double pi = std::numbers::pi;

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 2.0)) {
        throw DomainError("stable index must lie in (0, 2), got " + std::to_string(beta));
    }
}

// sin(pi e / 2) / e, continuous through e = 0.
double sinc_half_pi(double e) {
    if (std::abs(e) < 1e-4) {
        const double z = 0.5 * pi * e;
        return 0.5 * pi * (1.0 - z * z / 6.0);
    }
    return std::sin(0.5 * pi * e) / e;
}

// Tail series 2/pi sum (-1)^(k+1) Gamma(k beta)/k! sin(k pi beta/2) z^(-k beta).
// Convergent for beta < 1, asymptotic for beta > 1. Returns false when the
// partial sums are not trustworthy.
bool tail_series(double beta, double z, double& out) {
    const double log_z = std::log(z);
    double sum = 0.0;
    double max_term = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 400; ++k) {
        const double kb = k * beta;
        const double magnitude =
            std::exp(std::lgamma(kb) - std::lgamma(k + 1.0) - kb * log_z);
        if (!std::isfinite(magnitude)) {
            return false;
        }
        if (k > 2 && magnitude > prev) {
            return false;  // asymptotic series started to diverge
        }
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        const double term = sign * magnitude * std::sin(0.5 * pi * kb);
        sum += term;
        max_term = std::max(max_term, magnitude);
        prev = magnitude;
        if (magnitude < 1e-17 * std::abs(sum) && k > 1) {
            if (max_term > 1e3 * std::abs(sum)) {
                return false;  // cancellation
            }
            out = 2.0 / pi * sum;
            return true;
        }
    }
    return false;
}

// 1 - (2/pi) int_0^inf sin(s)/s exp(-(s/z)^beta) ds with an n-point rule.
double tail_quadrature(double beta, double z, std::size_t points) {
    const auto& rule = quad::gauss_legendre(points);
    auto integrand = [beta, z](double s) {
        const double damp = std::exp(-std::pow(s / z, beta));
        const double sinc = (s < 1e-8) ? 1.0 - s * s / 6.0 : std::sin(s) / s;
        return sinc * damp;
    };
    const double s_max = z * std::pow(40.0, 1.0 / beta);
    const double first = std::min(pi, s_max);

    double total = 0.0;
    // Geometric grading toward the (s/z)^beta branch point at the origin.
    double hi = first;
    for (int k = 0; k < 60; ++k) {
        const double lo = 0.5 * hi;
        total += quad::integrate(rule, lo, hi, integrand);
        hi = lo;
    }
    total += quad::integrate(rule, 0.0, hi, integrand);

    const double panels = std::ceil((s_max - first) / pi);
    if (panels > 5e6) {
        throw NumericalError("tail_prob: characteristic-function inversion needs too many panels");
    }
    const auto count = static_cast<std::int64_t>(std::max(0.0, panels));
    for (std::int64_t p = 0; p < count; ++p) {
        const double a = first + pi * static_cast<double>(p);
        total += quad::integrate(rule, a, a + pi, integrand);
    }
    return 1.0 - 2.0 / pi * total;
}

}  // namespace

void StableLaw::validate() const {
    check_beta(beta);
    if (!(tail_intensity > 0.0) || !std::isfinite(tail_intensity)) {
        throw DomainError("tail intensity must be positive and finite");
    }
}

double tail_constant(double beta) {
    check_beta(beta);
    return 2.0 * std::tgamma(2.0 - beta) * sinc_half_pi(1.0 - beta);
}

double tail_constant_log_derivative(double beta) {
    check_beta(beta);
    const double e = 1.0 - beta;
    // g(e) = (pi/2) cot(pi e/2) - 1/e
    double g = 0.0;
    if (std::abs(e) < 1e-3) {
        g = -pi * pi * e / 12.0 - std::pow(pi, 4) * e * e * e / 720.0;
    } else {
        g = 0.5 * pi / std::tan(0.5 * pi * e) - 1.0 / e;
    }
    return -boost::math::digamma(2.0 - beta) - g;
}

double sample_standard(double beta, Rng& rng) {
    check_beta(beta);
    const double v = pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    if (beta == 1.0) {
        return std::tan(v);
    }
    const double cos_v = std::cos(v);
    return std::sin(beta * v) / std::pow(cos_v, 1.0 / beta) *
           std::pow(std::cos((1.0 - beta) * v) / w, (1.0 - beta) / beta);
}

double increment_scale(const StableLaw& law, double dt) {
    law.validate();
    if (dt < 0.0) {
        throw DomainError("time step must be nonnegative");
    }
    return std::pow(0.5 * law.tail_intensity * tail_constant(law.beta) * dt, 1.0 / law.beta);
}

double increment(const StableLaw& law, double dt, Rng& rng) {
    const double scale = increment_scale(law, dt);
    if (dt == 0.0) {
        return 0.0;
    }
    return scale * sample_standard(law.beta, rng);
}

double standard_tail_prob(double beta, double z) {
    check_beta(beta);
    if (std::isnan(z)) {
        throw DomainError("tail_prob: threshold is NaN");
    }
    if (z <= 0.0) {
        return 1.0;
    }
    if (std::isinf(z)) {
        return 0.0;
    }
    if (beta == 1.0) {
        return 2.0 / pi * std::atan(1.0 / z);
    }
    double series = 0.0;
    if (tail_series(beta, z, series)) {
        return std::clamp(series, 0.0, 1.0);
    }
    const double coarse = tail_quadrature(beta, z, 16);
    const double fine = tail_quadrature(beta, z, 24);
    if (std::abs(coarse - fine) > 1e-10) {
        throw NumericalError("tail_prob: quadrature did not converge (beta=" +
                             std::to_string(beta) + ", z=" + std::to_string(z) + ")");
    }
    return std::clamp(fine, 0.0, 1.0);
}

double tail_prob(const StableLaw& law, double dt, double x) {
    law.validate();
    if (!(x > 0.0) || !(dt > 0.0)) {
        throw DomainError("tail_prob requires x > 0 and dt > 0");
    }
    return standard_tail_prob(law.beta, x / increment_scale(law, dt));
}

double calibrate_intensity(double beta, double dt, double threshold, double target) {
    check_beta(beta);
    if (!(target > 0.0 && target < 1.0)) {
        throw DomainError("calibration target must lie in (0, 1)");
    }
    if (!(dt > 0.0) || !(threshold > 0.0)) {
        throw DomainError("calibration requires dt > 0 and threshold > 0");
    }
    const double c = tail_constant(beta);
    auto z_of = [&](double a) { return threshold / std::pow(0.5 * a * c * dt, 1.0 / beta); };
    constexpr double a_lo = 1e-12;
    constexpr double a_hi = 1e12;
    const double log_z_lo = std::log(z_of(a_hi));
    const double log_z_hi = std::log(z_of(a_lo));

    auto f = [&](double log_z) { return standard_tail_prob(beta, std::exp(log_z)) - target; };
    const double f_lo = f(log_z_lo);
    const double f_hi = f(log_z_hi);
    if (f_lo < 0.0 || f_hi > 0.0) {
        throw NoBracketError("calibrate_intensity: target " + std::to_string(target) +
                             " unattainable for tail intensity in [1e-12, 1e12]");
    }
    std::uintmax_t max_iter = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
    const auto [lo, hi] =
        boost::math::tools::toms748_solve(f, log_z_lo, log_z_hi, f_lo, f_hi, tol, max_iter);
    const double z = std::exp(0.5 * (lo + hi));
    // invert z = threshold / ((a/2) C dt)^(1/beta)
    return 2.0 * std::pow(threshold / z, beta) / (c * dt);
}

}  // namespace bgidx::stable
