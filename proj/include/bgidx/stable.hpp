#pragma once

#include "bgidx/rng.hpp"

namespace bgidx::stable {

/// Symmetric stable jump law.
///
/// `tail_intensity` is the coefficient `a` in the two-sided Levy tail
/// F([-u,u]^c) = a / u^beta. A Levy density written as a' beta / |x|^(1+beta)
/// therefore has tail_intensity = 2 a'.
struct StableLaw {
    double beta = 1.0;
    double tail_intensity = 1.0;

    /// Throws DomainError unless 0 < beta < 2 and tail_intensity > 0.
    void validate() const;
};

/// C(beta) = 2 beta * int_0^inf (1 - cos y) y^(-1-beta) dy.
///
/// A component with Levy density a' beta / |x|^(1+beta) has characteristic
/// exponent -a' C(beta) |u|^beta. Closed form 2 Gamma(2-beta) sin(pi(1-beta)/2)/(1-beta),
/// evaluated by a series near beta = 1 where it equals pi.
[[nodiscard]] double tail_constant(double beta);

/// d/dbeta log C(beta), i.e. -digamma(2-beta) + 1/(1-beta) - (pi/2) tan(pi beta/2)
/// with the removable singularity at beta = 1 handled by series.
[[nodiscard]] double tail_constant_log_derivative(double beta);

/// One draw with characteristic function exp(-|u|^beta) (Chambers-Mallows-Stuck).
[[nodiscard]] double sample_standard(double beta, Rng& rng);

/// Scale s of the time-dt increment: Y_dt = s * Z with Z standard.
/// s = ((a/2) C(beta) dt)^(1/beta).
[[nodiscard]] double increment_scale(const StableLaw& law, double dt);

/// Time-dt increment of the Levy process with law `law`; dt = 0 gives 0
/// without consuming randomness.
[[nodiscard]] double increment(const StableLaw& law, double dt, Rng& rng);

/// P(|Z| >= z) for the standard law exp(-|u|^beta).
///
/// Uses the convergent/asymptotic tail series when it is well conditioned
/// and Gauss-Legendre inversion of the characteristic function otherwise.
/// Throws NumericalError when two quadrature orders disagree by more than 1e-10.
[[nodiscard]] double standard_tail_prob(double beta, double z);

/// P(|Y_dt| >= x) for the increment of `law` over dt.
[[nodiscard]] double tail_prob(const StableLaw& law, double dt, double x);

/// Tail intensity a with tail_prob({beta, a}, dt, threshold) == target.
/// Bracket a in [1e-12, 1e12]; relative tolerance 1e-8 or better.
/// Throws NoBracketError when the target cannot be reached inside the bracket.
[[nodiscard]] double calibrate_intensity(double beta, double dt, double threshold,
                                         double target);

}  // namespace bgidx::stable
