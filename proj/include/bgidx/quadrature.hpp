#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bgidx::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule with `points` nodes (Newton iteration on P_n, accurate to ~1e-15).
[[nodiscard]] const GaussLegendre& gauss_legendre(std::size_t points);

/// Integral of f over [a, b] with a fixed rule.
template <class F>
[[nodiscard]] double integrate(const GaussLegendre& rule, double a, double b, F&& f) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    return half * sum;
}

}  // namespace bgidx::quad
