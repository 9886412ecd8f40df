#include "bgidx/estimators.hpp"

#include "bgidx/errors.hpp"
#include "bgidx/nelder_mead.hpp"
#include "bgidx/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bgidx::est {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTolerance = 1e-10;

void check_data(const ContrastData& data, const ContrastConfig& config) {
    const std::size_t L = config.v_grid.size();
    if (data.thresholds.size() != L || data.counts.size() != L) {
        throw DomainError("contrast data must have one count per v-grid point");
    }
    const double u = data.thresholds.front();
    if (!(u > 0.0)) {
        throw DomainError("contrast thresholds must be positive");
    }
    for (std::size_t l = 0; l < L; ++l) {
        const double expect = config.v_grid[l] * u;
        if (std::abs(data.thresholds[l] - expect) > 1e-9 * expect) {
            throw DomainError("contrast thresholds must equal v_l * u_n");
        }
    }
}

// Weighted, column-normalized design sqrt(w_l) (v_l u_n)^(-x_i).
struct Design {
    Eigen::MatrixXd A;       // normalized columns
    Eigen::VectorXd scale;   // column norms
    Eigen::VectorXd y;       // sqrt(w) * counts
};

Design make_design(const ContrastData& data, std::span<const double> w,
                   std::span<const double> exponents) {
    const auto L = static_cast<Eigen::Index>(data.thresholds.size());
    const auto j = static_cast<Eigen::Index>(exponents.size());
    Design d{Eigen::MatrixXd(L, j), Eigen::VectorXd(j), Eigen::VectorXd(L)};
    for (Eigen::Index l = 0; l < L; ++l) {
        const double sw = std::sqrt(w[static_cast<std::size_t>(l)]);
        d.y(l) = sw * data.counts[static_cast<std::size_t>(l)];
        for (Eigen::Index i = 0; i < j; ++i) {
            d.A(l, i) = sw * std::pow(data.thresholds[static_cast<std::size_t>(l)],
                                      -exponents[static_cast<std::size_t>(i)]);
        }
    }
    for (Eigen::Index i = 0; i < j; ++i) {
        d.scale(i) = d.A.col(i).norm();
        d.A.col(i) /= d.scale(i);
    }
    return d;
}

bool full_rank(const Eigen::MatrixXd& A) {
    if (A.cols() == 0) {
        return true;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) > kRankTolerance * s(0);
}

struct BoundedSolution {
    std::vector<double> gamma;
    double objective = kInf;
};

// Exact box-constrained least squares: the optimum of a convex quadratic is
// the unconstrained optimum on some face, so every assignment of each
// coefficient to {free, lower bound, upper bound} is tried and the best
// feasible one kept. Faces with a rank-deficient free block are skipped.
BoundedSolution bounded_least_squares(const Design& d, std::span<const double> lo,
                                      std::span<const double> hi) {
    const auto j = static_cast<std::size_t>(d.A.cols());
    std::size_t states = 1;
    for (std::size_t i = 0; i < j; ++i) {
        states *= std::isfinite(hi[i]) ? 3 : 2;
    }
    BoundedSolution best;
    std::vector<int> face(j);
    for (std::size_t code = 0; code < states; ++code) {
        std::size_t c = code;
        std::vector<Eigen::Index> free;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < j; ++i) {
            const std::size_t base = std::isfinite(hi[i]) ? 3 : 2;
            face[i] = static_cast<int>(c % base);
            c /= base;
            // gamma_i in original units = coefficient / scale_i
            const auto ii = static_cast<Eigen::Index>(i);
            if (face[i] == 0) {
                free.push_back(ii);
            } else {
                g(ii) = (face[i] == 1 ? lo[i] : hi[i]) * d.scale(ii);
            }
        }
        Eigen::VectorXd r = d.y - d.A * g;
        if (!free.empty()) {
            Eigen::MatrixXd F(d.A.rows(), static_cast<Eigen::Index>(free.size()));
            for (std::size_t k = 0; k < free.size(); ++k) {
                F.col(static_cast<Eigen::Index>(k)) = d.A.col(free[k]);
            }
            if (!full_rank(F)) {
                continue;
            }
            const Eigen::VectorXd sol = F.colPivHouseholderQr().solve(r);
            bool feasible = true;
            for (std::size_t k = 0; k < free.size(); ++k) {
                const auto i = static_cast<std::size_t>(free[k]);
                const double gi = sol(static_cast<Eigen::Index>(k)) / d.scale(free[k]);
                if (gi < lo[i] || gi > hi[i]) {
                    feasible = false;
                    break;
                }
                g(free[k]) = sol(static_cast<Eigen::Index>(k));
            }
            if (!feasible) {
                continue;
            }
            r = d.y - d.A * g;
        }
        const double obj = r.squaredNorm();
        if (obj < best.objective) {
            best.objective = obj;
            best.gamma.resize(j);
            for (std::size_t i = 0; i < j; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                best.gamma[i] = face[i] == 0 ? g(ii) / d.scale(ii)
                                             : (face[i] == 1 ? lo[i] : hi[i]);
            }
        }
    }
    return best;
}

double phi(double p) { return 0.5 * (1.0 + std::sin(p)); }

double phi_inverse(double t) {
    t = std::clamp(t, 1e-6, 1.0 - 1e-6);
    return std::asin(2.0 * t - 1.0);
}

// Box for the ordered exponents and the intensities.
struct Bounds {
    std::vector<double> x_lo, x_hi, g_lo, g_hi;
};

Bounds make_bounds(const EstimateSet& prelim, const ContrastConfig& config) {
    const std::size_t j = prelim.entries.size();
    Bounds b{std::vector<double>(j, 0.0), std::vector<double>(j, 2.0),
             std::vector<double>(j, 0.0), std::vector<double>(j, kInf)};
    if (!config.box) {
        return b;
    }
    for (std::size_t i = 0; i < j; ++i) {
        const auto& e = prelim.entries[i];
        if (!e.usable()) {
            continue;
        }
        b.x_lo[i] = std::max(0.0, e.beta - config.box->beta);
        b.x_hi[i] = std::min(2.0, e.beta + config.box->beta);
        b.g_lo[i] = std::max(0.0, e.gamma - config.box->gamma);
        b.g_hi[i] = e.gamma + config.box->gamma;
    }
    return b;
}

// Ordered exponents from unconstrained coordinates:
// x_1 = lo_1 + (hi_1 - lo_1) phi(p_1), x_i = lo_i + (min(hi_i, x_{i-1}) - lo_i) phi(p_i).
// Empty when the box leaves no ordered point.
std::vector<double> to_exponents(std::span<const double> p, const Bounds& b) {
    std::vector<double> x(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double top = i == 0 ? b.x_hi[0] : std::min(b.x_hi[i], x[i - 1]);
        if (top < b.x_lo[i]) {
            return {};
        }
        x[i] = b.x_lo[i] + (top - b.x_lo[i]) * phi(p[i]);
    }
    return x;
}

std::vector<double> to_coordinates(std::span<const double> x, const Bounds& b) {
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double top = i == 0 ? b.x_hi[0] : std::min(b.x_hi[i], x[i - 1]);
        const double span = top - b.x_lo[i];
        p[i] = phi_inverse(span > 0.0 ? (x[i] - b.x_lo[i]) / span : 0.5);
    }
    return p;
}

// Start exponents: the preliminary estimates projected into D, with
// placeholders for failed entries.
std::vector<double> base_start(const EstimateSet& prelim, const Bounds& b) {
    const std::size_t j = prelim.entries.size();
    std::vector<double> x(j);
    for (std::size_t i = 0; i < j; ++i) {
        const auto& e = prelim.entries[i];
        const double prev = i == 0 ? 2.0 : x[i - 1];
        double v = e.usable() ? e.beta : prev * 0.8;
        v = std::clamp(v, b.x_lo[i], std::min(b.x_hi[i], prev));
        x[i] = v;
    }
    return x;
}

}  // namespace

ContrastConfig::ContrastConfig() : v_grid(default_v_grid()) {}

std::vector<double> default_v_grid() {
    const double base[] = {7, 10, 15, 20, 30, 40, 60, 80, 90, 120};
    std::vector<double> v;
    for (double b : base) {
        v.push_back(b / 7.0);
    }
    return v;
}

std::vector<double> decreasing_weights(std::span<const double> v_grid) {
    std::vector<double> w;
    for (double v : v_grid) {
        if (!(v > 0.0)) {
            throw DomainError("v-grid values must be positive");
        }
        w.push_back(1.0 / v);
    }
    return w;
}

void ContrastConfig::validate(std::size_t j) const {
    const std::size_t L = v_grid.size();
    if (j < 1) {
        throw DomainError("contrast needs at least one index");
    }
    if (L < 2 * j) {
        throw DomainError("v-grid must have at least 2j points");
    }
    if (v_grid.front() != 1.0) {
        throw DomainError("v-grid must start at 1");
    }
    for (std::size_t l = 1; l < L; ++l) {
        if (!(v_grid[l] > v_grid[l - 1])) {
            throw DomainError("v-grid must be strictly increasing");
        }
    }
    if (!weights.empty()) {
        if (weights.size() != L) {
            throw DomainError("weights must match the v-grid length");
        }
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw DomainError("weights must be positive and finite");
            }
        }
    }
    if (!(tolerance > 0.0) || max_iterations < 1 || multistarts < 1) {
        throw DomainError("optimizer tolerance, iteration limit and multistarts must be positive");
    }
    if (box && (!(box->beta > 0.0) || !(box->gamma > 0.0))) {
        throw DomainError("box half-widths must be positive");
    }
}

std::vector<double> ContrastConfig::effective_weights() const {
    return weights.empty() ? std::vector<double>(v_grid.size(), 1.0) : weights;
}

ContrastData ContrastData::from(const counts::TailCountCurve& curve) {
    ContrastData d;
    for (const auto& p : curve.points) {
        d.thresholds.push_back(p.threshold);
        d.counts.push_back(static_cast<double>(p.count));
    }
    return d;
}

std::vector<double> contrast_thresholds(double u_n, const ContrastConfig& config) {
    if (!(u_n > 0.0)) {
        throw DomainError("u_n must be positive");
    }
    std::vector<double> t;
    for (double v : config.v_grid) {
        t.push_back(v * u_n);
    }
    return t;
}

double contrast_value(const ContrastData& data, const ContrastConfig& config,
                      std::span<const PowerTerm> params) {
    config.validate(1);
    check_data(data, config);
    for (const auto& p : params) {
        if (!(p.exponent >= 0.0 && p.exponent <= 2.0) || !(p.intensity >= 0.0)) {
            throw DomainError("contrast parameters outside D: exponents in [0,2], gamma >= 0");
        }
    }
    const auto w = config.effective_weights();
    double total = 0.0;
    for (std::size_t l = 0; l < data.counts.size(); ++l) {
        double model = 0.0;
        for (const auto& p : params) {
            model += p.intensity * std::pow(data.thresholds[l], -p.exponent);
        }
        const double r = data.counts[l] - model;
        total += w[l] * r * r;
    }
    return total;
}

double contrast_value(const counts::TailCountCurve& curve, const ContrastConfig& config,
                      std::span<const PowerTerm> params) {
    return contrast_value(ContrastData::from(curve), config, params);
}

std::vector<double> profile_gammas(const ContrastData& data, const ContrastConfig& config,
                                   std::span<const double> exponents) {
    config.validate(exponents.size());
    check_data(data, config);
    for (double x : exponents) {
        if (!(x >= 0.0 && x <= 2.0)) {
            throw DomainError("exponents must lie in [0, 2]");
        }
    }
    const auto w = config.effective_weights();
    const Design d = make_design(data, w, exponents);
    if (!full_rank(d.A)) {
        throw RankDeficientError("profile_gammas: design matrix is rank deficient");
    }
    const std::vector<double> lo(exponents.size(), 0.0);
    const std::vector<double> hi(exponents.size(), kInf);
    return bounded_least_squares(d, lo, hi).gamma;
}

EstimateSet final_estimate_from_data(const ContrastData& data, const EstimateSet& prelim_in,
                                     const ContrastConfig& config) {
    const EstimateSet prelim = sanitize(prelim_in);
    const std::size_t j = prelim.entries.size();
    if (prelim.usable_count() < 1) {
        throw DomainError("final_estimate needs at least one usable preliminary estimate");
    }
    config.validate(j);
    check_data(data, config);
    const auto w = config.effective_weights();
    const Bounds bounds = make_bounds(prelim, config);

    // Profiled contrast as a function of the unconstrained coordinates.
    auto profiled = [&](std::span<const double> x) -> BoundedSolution {
        const Design d = make_design(data, w, x);
        return bounded_least_squares(d, bounds.g_lo, bounds.g_hi);
    };
    auto objective = [&](std::span<const double> p) {
        const auto x = to_exponents(p, bounds);
        if (x.empty()) {
            return kInf;
        }
        return profiled(x).objective;
    };

    EstimateSet out;
    out.u_n = data.u_n();
    out.thresholds = data.thresholds;
    out.side = prelim.side;
    out.entries.resize(j);

    opt::NelderMeadOptions nm;
    nm.tolerance = config.tolerance;
    nm.max_iterations = config.max_iterations;

    const std::vector<double> x_base = base_start(prelim, bounds);
    OptimizerDiagnostics diag;
    diag.starts = config.multistarts;
    double best_value = kInf;
    std::vector<double> best_p;
    for (std::size_t s = 0; s < config.multistarts; ++s) {
        std::vector<double> x0 = x_base;
        if (s > 0) {
            // deterministic perturbation of the preliminary start
            Rng rng(derive_seed(0x5eedc0de, s));
            for (std::size_t i = 0; i < j; ++i) {
                x0[i] += rng.uniform(-0.15, 0.15);
            }
            std::sort(x0.begin(), x0.end(), std::greater<>());
            for (std::size_t i = 0; i < j; ++i) {
                const double top = i == 0 ? bounds.x_hi[0] : std::min(bounds.x_hi[i], x0[i - 1]);
                x0[i] = std::clamp(x0[i], bounds.x_lo[i], std::max(bounds.x_lo[i], top));
            }
        }
        const auto p0 = to_coordinates(x0, bounds);
        const double start_value = objective(p0);
        const auto res = opt::nelder_mead(objective, p0, nm);
        diag.evaluations += res.evaluations + 1;
        if (!res.converged) {
            continue;
        }
        ++diag.converged_starts;
        if (res.value < best_value) {
            best_value = res.value;
            best_p = res.x;
            diag.best_start = s;
            diag.iterations = res.iterations;
            diag.start_contrast = start_value;
        }
    }
    diag.converged = !best_p.empty();
    out.optimizer = diag;
    if (!diag.converged) {
        return out;  // every entry Failed
    }
    const auto x = to_exponents(best_p, bounds);
    const auto sol = profiled(x);
    out.contrast = sol.objective;
    for (std::size_t i = 0; i < j; ++i) {
        out.entries[i].beta = x[i];
        out.entries[i].gamma = sol.gamma[i];
        out.entries[i].status = sol.gamma[i] == 0.0 ? Status::Clipped : Status::Ok;
    }
    return out;
}

EstimateSet final_estimate(const sim::IncrementSeries& series, const sim::SamplingScheme& scheme,
                           const EstimateSet& prelim, const ContrastConfig& config) {
    if (series.increments.size() != scheme.n()) {
        throw DomainError("series length does not match the sampling scheme");
    }
    const auto thresholds = contrast_thresholds(prelim.u_n, config);
    const auto curve = counts::tail_curve(series.increments, thresholds, prelim.side);
    return final_estimate_from_data(ContrastData::from(curve), prelim, config);
}

}  // namespace bgidx::est
