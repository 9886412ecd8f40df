#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bgidx::opt {

struct NelderMeadOptions {
    double tolerance = 1e-8;        // simplex diameter (max-norm) at convergence
    std::size_t max_iterations = 500;  // per simplex run
    double initial_step = 0.3;
    std::size_t max_restarts = 3;   // re-seed the simplex at the best vertex
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimize `f` from `x0`. Non-finite objective values are treated as +inf.
/// The best value never increases along the run. A run counts as converged
/// once a fresh simplex around the best vertex collapses without moving it by
/// more than the tolerance.
[[nodiscard]] NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                                           const NelderMeadOptions& options = {});

}  // namespace bgidx::opt
