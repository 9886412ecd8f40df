#include "bgidx/nelder_mead.hpp"

#include "bgidx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bgidx::opt {

namespace {

struct Run {
    std::vector<double> x;
    double value;
    std::size_t iterations;
    bool collapsed;
};

double max_distance(const std::vector<std::vector<double>>& simplex) {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
        for (std::size_t k = 0; k < simplex[0].size(); ++k) {
            d = std::max(d, std::abs(simplex[i][k] - simplex[0][k]));
        }
    }
    return d;
}

// One standard Nelder-Mead run (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Vertex 0 is kept as the best after every iteration.
Run simplex_run(const std::function<double(const std::vector<double>&)>& f,
                const std::vector<double>& x0, double f0, const NelderMeadOptions& o) {
    const std::size_t d = x0.size();
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> vals(d + 1, f0);
    for (std::size_t i = 0; i < d; ++i) {
        pts[i + 1][i] += o.initial_step;
        vals[i + 1] = f(pts[i + 1]);
    }
    std::vector<std::size_t> order(d + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<std::vector<double>> p2(d + 1);
        std::vector<double> v2(d + 1);
        for (std::size_t i = 0; i <= d; ++i) {
            p2[i] = std::move(pts[order[i]]);
            v2[i] = vals[order[i]];
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };
    sort_simplex();

    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    std::size_t it = 0;
    for (; it < o.max_iterations; ++it) {
        if (max_distance(pts) <= o.tolerance) {
            return {pts[0], vals[0], it, true};
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                centroid[k] += pts[i][k] / static_cast<double>(d);
            }
        }
        const auto& worst = pts[d];
        for (std::size_t k = 0; k < d; ++k) {
            xr[k] = centroid[k] + (centroid[k] - worst[k]);
        }
        const double fr = f(xr);
        if (fr < vals[0]) {
            for (std::size_t k = 0; k < d; ++k) {
                xe[k] = centroid[k] + 2.0 * (centroid[k] - worst[k]);
            }
            const double fe = f(xe);
            if (fe < fr) {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
        } else if (fr < vals[d - 1]) {
            pts[d] = xr;
            vals[d] = fr;
        } else {
            const bool outside = fr < vals[d];
            for (std::size_t k = 0; k < d; ++k) {
                xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k])
                                : centroid[k] + 0.5 * (worst[k] - centroid[k]);
            }
            const double fc = f(xc);
            if (fc < (outside ? fr : vals[d])) {
                pts[d] = xc;
                vals[d] = fc;
            } else {
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t k = 0; k < d; ++k) {
                        pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
                    }
                    vals[i] = f(pts[i]);
                }
            }
        }
        sort_simplex();
    }
    return {pts[0], vals[0], it, max_distance(pts) <= o.tolerance};
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
    if (x0.empty()) {
        throw DomainError("nelder_mead: empty start point");
    }
    if (!(options.tolerance > 0.0) || options.max_iterations < 1 ||
        !(options.initial_step > 0.0)) {
        throw DomainError("nelder_mead: tolerance, step and iteration limit must be positive");
    }
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<double> x = std::move(x0);
    double fx = eval(x);
    for (std::size_t attempt = 0; attempt <= options.max_restarts; ++attempt) {
        Run run = simplex_run(eval, x, fx, options);
        result.iterations += run.iterations;
        double moved = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            moved = std::max(moved, std::abs(run.x[k] - x[k]));
        }
        if (run.value <= fx) {
            x = std::move(run.x);
            fx = run.value;
        }
        if (!run.collapsed) {
            break;
        }
        if (attempt > 0 && moved <= options.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.x = std::move(x);
    result.value = fx;
    return result;
}

}  // namespace bgidx::opt
