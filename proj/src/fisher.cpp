#include "bgidx/fisher.hpp"

#include "bgidx/errors.hpp"
#include "bgidx/quadrature.hpp"
#include "bgidx/stable.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace bgidx::fisher {

namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kDecay = 37.0;  // exp(-37) < 1e-16
constexpr int kExplicitImages = 32;
constexpr double kFdStep = 1e-4;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place DCT-I of length n: Y_k = X_0 + (-1)^k X_{n-1} + 2 sum_{j=1}^{n-2} X_j cos(pi j k / (n-1)).
void dct1(std::vector<double>& data) {
    const int n = static_cast<int>(data.size());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_r2r_1d(n, data.data(), data.data(), FFTW_REDFT00, FFTW_ESTIMATE);
    }
    if (plan == nullptr) {
        throw NumericalError("FFTW could not create a DCT plan");
    }
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

struct Component {
    double beta;
    double a;
};

std::vector<Component> components(const ParametricModel& m) {
    std::vector<Component> out;
    if (m.a1 > 0.0) {
        out.push_back({m.beta1, m.a1});
    }
    if (m.a2 > 0.0) {
        out.push_back({m.beta2, m.a2});
    }
    return out;
}

double real_exponent(const ParametricModel& m, double u) {
    const double au = std::abs(u);
    double v = -0.5 * m.c * u * u;
    if (au > 0.0) {
        if (m.a1 > 0.0) {
            v -= m.a1 * stable::tail_constant(m.beta1) * std::pow(au, m.beta1);
        }
        if (m.a2 > 0.0) {
            v -= m.a2 * stable::tail_constant(m.beta2) * std::pow(au, m.beta2);
        }
    }
    return v;
}

struct Geometry {
    double dx;
    std::size_t M;  // N / 2
    double u_max;
    std::size_t doublings;
};

Geometry geometry(const ParametricModel& m, double delta, const GridSpec& spec) {
    if (spec.N < 16 || (spec.N & (spec.N - 1)) != 0) {
        throw DomainError("grid size N must be a power of two >= 16");
    }
    if (!(spec.frequency_margin >= 1.0)) {
        throw DomainError("frequency margin must be at least 1");
    }
    auto h = [&](double u) { return -delta * real_exponent(m, u) - kDecay; };
    double hi = 1.0;
    while (h(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e300) {
            throw NumericalError("characteristic function does not decay");
        }
    }
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::abs(b); };
    const auto [lo_u, hi_u] =
        boost::math::tools::toms748_solve(h, 0.0, hi, h(0.0), h(hi), tol, iters);
    const double u_star = 0.5 * (lo_u + hi_u);
    const double u_max = spec.frequency_margin * u_star;
    const double dx = std::numbers::pi / u_max;
    std::size_t N = spec.N;
    std::size_t doublings = 0;
    if (spec.half_width) {
        while (dx * static_cast<double>(N / 2) < *spec.half_width) {
            if (doublings == 5) {
                throw NumericalError("density grid does not reach the requested half-width "
                                     "after 5 doublings");
            }
            N *= 2;
            ++doublings;
        }
    }
    return {dx, N / 2, u_max, doublings};
}

// Values at y_k = k dx (k = 0..M) of (1/2pi) int cos(u y) S(u) du for an even S.
template <class Spectrum>
std::vector<double> invert(const Geometry& g, Spectrum&& spectrum) {
    const double du = std::numbers::pi / (static_cast<double>(g.M) * g.dx);
    std::vector<double> data(g.M + 1);
    for (std::size_t j = 0; j <= g.M; ++j) {
        data[j] = spectrum(du * static_cast<double>(j));
    }
    dct1(data);
    const double scale = du / (2.0 * std::numbers::pi);
    for (double& v : data) {
        v *= scale;
    }
    return data;
}

// Remove the periodic images g(mP + y) + g(mP - y), m >= 1, with P = 2 M dx:
// explicit for m <= 32, midpoint Euler-Maclaurin integral of G = int_z^inf g beyond.
template <class Levy, class LevyTail>
void subtract_images(std::vector<double>& vals, const Geometry& geo, Levy&& g, LevyTail&& G) {
    const double P = 2.0 * static_cast<double>(geo.M) * geo.dx;
    const double z_tail = (kExplicitImages + 0.5) * P;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double y = geo.dx * static_cast<double>(k);
        double s = 0.0;
        for (int m = kExplicitImages; m >= 1; --m) {
            s += g(m * P + y) + g(m * P - y);
        }
        s += (G(z_tail + y) + G(z_tail - y)) / P;
        vals[k] -= s;
    }
}

// Levy density pieces for z > 0 (scaled by delta by the callers).
double levy_density(const std::vector<Component>& cs, double z) {
    double v = 0.0;
    for (const auto& c : cs) {
        v += c.a * c.beta * std::pow(z, -1.0 - c.beta);
    }
    return v;
}

double levy_tail(const std::vector<Component>& cs, double z) {
    double v = 0.0;
    for (const auto& c : cs) {
        v += c.a * std::pow(z, -c.beta);
    }
    return v;
}

std::vector<double> density_values(const ParametricModel& m, double delta, const Geometry& geo) {
    auto vals = invert(geo, [&](double u) { return std::exp(delta * real_exponent(m, u)); });
    const auto cs = components(m);
    if (!cs.empty()) {
        subtract_images(
            vals, geo, [&](double z) { return delta * levy_density(cs, z); },
            [&](double z) { return delta * levy_tail(cs, z); });
    }
    return vals;
}

Component component_of(const ParametricModel& m, Parameter which) {
    const bool first = which == Parameter::Beta1 || which == Parameter::A1;
    return first ? Component{m.beta1, m.a1} : Component{m.beta2, m.a2};
}

bool is_index(Parameter p) { return p == Parameter::Beta1 || p == Parameter::Beta2; }

// d nu / d theta and its tail integral, for z > 0.
double d_levy_density(const ParametricModel& m, Parameter which, double z) {
    const auto c = component_of(m, which);
    const double base = std::pow(z, -1.0 - c.beta);
    return is_index(which) ? c.a * base * (1.0 - c.beta * std::log(z)) : c.beta * base;
}

double d_levy_tail(const ParametricModel& m, Parameter which, double z) {
    const auto c = component_of(m, which);
    const double base = std::pow(z, -c.beta);
    return is_index(which) ? -c.a * base * std::log(z) : base;
}

// 2 delta int_X^inf (d nu)^2 / nu dz, on a log scale.
template <class DLevy>
double far_tail_information(const std::vector<Component>& cs, double delta, double X,
                            DLevy&& dnu) {
    if (cs.empty()) {
        return 0.0;
    }
    const auto& rule = quad::gauss_legendre(16);
    const double t0 = std::log(X);
    double total = 0.0;
    for (int p = 0; p < 120; ++p) {
        total += quad::integrate(rule, t0 + p, t0 + p + 1.0, [&](double t) {
            const double z = std::exp(t);
            const double d = dnu(z);
            return d * d / levy_density(cs, z) * z;
        });
    }
    return 2.0 * delta * total;
}

double trapezoid_half(const std::vector<double>& f, double dx) {
    double s = f.front() + f.back();
    for (std::size_t k = 1; k + 1 < f.size(); ++k) {
        s += 2.0 * f[k];
    }
    return dx * s;
}

// Points where p is at the inversion's roundoff level carry no information
// and are skipped.
double information_window(const std::vector<double>& p, const std::vector<double>& dp,
                          double dx) {
    const double noise = 1e-14 * *std::max_element(p.begin(), p.end());
    std::vector<double> f(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        f[k] = p[k] > noise ? dp[k] * dp[k] / p[k] : 0.0;
    }
    return trapezoid_half(f, dx);
}

Geometry geometry_of(const DensityGrid& grid) {
    return {grid.dx, grid.half.size() - 1, grid.u_max, grid.doublings};
}

void check_delta(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw DomainError("time step delta must be positive and finite");
    }
}

ParametricModel perturbed(const ParametricModel& m, Parameter which, double h) {
    ParametricModel out = m;
    switch (which) {
        case Parameter::Beta1:
            out.beta1 += h;
            break;
        case Parameter::A1:
            out.a1 += h;
            break;
        case Parameter::Beta2:
            out.beta2 += h;
            break;
        case Parameter::A2:
            out.a2 += h;
            break;
    }
    return out;
}

double fd_step(const ParametricModel& m, Parameter which) {
    return is_index(which) ? kFdStep : kFdStep * component_of(m, which).a;
}

}  // namespace

void ParametricModel::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("variance c must be positive");
    }
    if (!(beta2 > 0.0 && beta2 < beta1 && beta1 < 2.0)) {
        throw DomainError("indices must satisfy 0 < beta2 < beta1 < 2");
    }
    if (!(a1 >= 0.0) || !(a2 >= 0.0) || !std::isfinite(a1) || !std::isfinite(a2)) {
        throw DomainError("intensities must be nonnegative and finite");
    }
    if (!std::isfinite(b)) {
        throw DomainError("drift must be finite");
    }
}

std::string_view to_string(Parameter p) {
    switch (p) {
        case Parameter::Beta1:
            return "beta1";
        case Parameter::A1:
            return "a1";
        case Parameter::Beta2:
            return "beta2";
        case Parameter::A2:
            return "a2";
    }
    return "unknown";
}

std::complex<double> char_exponent(const ParametricModel& model, double u) {
    model.validate();
    return {real_exponent(model, u), u * model.b};
}

double char_exponent_derivative(const ParametricModel& model, Parameter which, double u) {
    model.validate();
    const double au = std::abs(u);
    if (au == 0.0) {
        return 0.0;
    }
    const auto c = component_of(model, which);
    const double base = stable::tail_constant(c.beta) * std::pow(au, c.beta);
    if (!is_index(which)) {
        return -base;
    }
    return -c.a * base * (stable::tail_constant_log_derivative(c.beta) + std::log(au));
}

DensityGrid density_grid(const ParametricModel& model, double delta, const GridSpec& spec) {
    model.validate();
    check_delta(delta);
    const Geometry geo = geometry(model, delta, spec);
    DensityGrid grid;
    grid.center = model.b * delta;
    grid.dx = geo.dx;
    grid.N = 2 * geo.M;
    grid.u_max = geo.u_max;
    grid.doublings = geo.doublings;
    grid.half = density_values(model, delta, geo);
    for (double& v : grid.half) {
        v = std::max(v, kDensityFloor);
    }
    grid.window_mass = trapezoid_half(grid.half, geo.dx);
    grid.tail_mass = 2.0 * delta * levy_tail(components(model), grid.half_width());
    return grid;
}

std::vector<double> density_derivative(const ParametricModel& model, double delta,
                                       Parameter which, ScoreMethod method,
                                       const DensityGrid& grid) {
    model.validate();
    check_delta(delta);
    const Geometry geo = geometry_of(grid);
    if (method == ScoreMethod::Analytic) {
        auto vals = invert(geo, [&](double u) {
            const double dpsi = char_exponent_derivative(model, which, u);
            return delta * dpsi * std::exp(delta * real_exponent(model, u));
        });
        if (component_of(model, which).a > 0.0 || !is_index(which)) {
            subtract_images(
                vals, geo, [&](double z) { return delta * d_levy_density(model, which, z); },
                [&](double z) { return delta * d_levy_tail(model, which, z); });
        }
        return vals;
    }
    const double h = fd_step(model, which);
    if (!is_index(which) && h == 0.0) {
        throw DomainError("finite-difference score needs a positive intensity");
    }
    const auto plus = density_values(perturbed(model, which, h), delta, geo);
    const auto minus = density_values(perturbed(model, which, -h), delta, geo);
    std::vector<double> out(plus.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = (plus[k] - minus[k]) / (2.0 * h);
    }
    return out;
}

double fisher_diagonal(const ParametricModel& model, double delta, Parameter which,
                       ScoreMethod method, const GridSpec& spec) {
    const DensityGrid grid = density_grid(model, delta, spec);
    const auto dp = density_derivative(model, delta, which, method, grid);
    const double tail = far_tail_information(
        components(model), delta, grid.half_width(),
        [&](double z) { return d_levy_density(model, which, z); });
    return information_window(grid.half, dp, grid.dx) + tail;
}

const FisherEntry& FisherResult::get(Parameter p) const {
    for (const auto& e : entries) {
        if (e.which == p) {
            return e;
        }
    }
    throw DomainError("unknown parameter");
}

FisherResult fisher_information(const ParametricModel& model, double delta,
                                const GridSpec& spec) {
    const DensityGrid grid = density_grid(model, delta, spec);
    FisherResult out;
    out.delta = delta;
    out.window_mass = grid.window_mass;
    out.tail_mass = grid.tail_mass;
    out.captured_mass = grid.captured_mass();
    out.half_width = grid.half_width();
    out.N = grid.N;
    out.accurate = std::abs(out.captured_mass - 1.0) <= 1e-6;
    const auto cs = components(model);
    for (std::size_t i = 0; i < kAllParameters.size(); ++i) {
        const Parameter which = kAllParameters[i];
        FisherEntry& e = out.entries[i];
        e.which = which;
        const auto an = density_derivative(model, delta, which, ScoreMethod::Analytic, grid);
        const auto fd =
            density_derivative(model, delta, which, ScoreMethod::FiniteDifference, grid);
        e.far_tail = far_tail_information(cs, delta, grid.half_width(), [&](double z) {
            return d_levy_density(model, which, z);
        });
        e.value = information_window(grid.half, an, grid.dx) + e.far_tail;
        e.value_fd = information_window(grid.half, fd, grid.dx) + e.far_tail;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < an.size(); ++k) {
            num += (an[k] - fd[k]) * (an[k] - fd[k]);
            den += an[k] * an[k];
        }
        e.score_rel_l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;
        e.accurate = e.score_rel_l2 <= 1e-3;
        out.accurate = out.accurate && e.accurate;
    }
    return out;
}

std::vector<FisherResult> fisher_ladder(const ParametricModel& model,
                                        std::span<const double> deltas, std::size_t jobs,
                                        const GridSpec& spec) {
    model.validate();
    std::vector<FisherResult> out(deltas.size());
    std::vector<std::exception_ptr> errors(deltas.size());
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, deltas.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < deltas.size(); i += jobs) {
                try {
                    out[i] = fisher_information(model, deltas[i], spec);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

double fisher_information_custom(const ParametricModel& model, double delta,
                                 const CustomParameter& param, const GridSpec& spec) {
    if (!param.d_exponent) {
        throw DomainError("custom parameter needs d_exponent");
    }
    const DensityGrid grid = density_grid(model, delta, spec);
    const Geometry geo = geometry_of(grid);
    auto dp = invert(geo, [&](double u) {
        return delta * param.d_exponent(u) * std::exp(delta * real_exponent(model, u));
    });
    const auto cs = components(model);
    double tail = 0.0;
    if (static_cast<bool>(param.d_levy_density) != static_cast<bool>(param.d_levy_tail)) {
        throw DomainError("custom parameter needs both d_levy_density and d_levy_tail or neither");
    }
    if (param.d_levy_density && !cs.empty()) {
        subtract_images(
            dp, geo, [&](double z) { return delta * param.d_levy_density(z); },
            [&](double z) { return delta * param.d_levy_tail(z); });
        tail = far_tail_information(cs, delta, grid.half_width(), param.d_levy_density);
    }
    return information_window(grid.half, dp, grid.dx) + tail;
}

TheoryExponents theoretical_exponents(const ParametricModel& model, Parameter which) {
    model.validate();
    const double b1 = model.beta1;
    const double b2 = model.beta2;
    switch (which) {
        case Parameter::Beta1:
            return {1.0 - b1 / 2.0, 2.0 - b1 / 2.0};
        case Parameter::A1:
            return {1.0 - b1 / 2.0, -b1 / 2.0};
        case Parameter::Beta2:
            return {1.0 - b2 + b1 / 2.0, 2.0 - b2 + b1 / 2.0};
        case Parameter::A2:
            return {1.0 - b2 + b1 / 2.0, -(b2 - b1 / 2.0)};
    }
    return {};
}

SlopeFit fit_exponent(std::span<const double> deltas, std::span<const double> values,
                      double log_exponent) {
    if (deltas.size() != values.size() || deltas.size() < 2) {
        throw DomainError("slope fit needs at least two (delta, value) pairs");
    }
    const auto n = static_cast<Eigen::Index>(deltas.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = deltas[static_cast<std::size_t>(i)];
        const double v = values[static_cast<std::size_t>(i)];
        if (!(d > 0.0 && d < 1.0) || !(v > 0.0)) {
            throw DomainError("slope fit needs 0 < delta < 1 and positive values");
        }
        A(i, 0) = std::log(d);
        A(i, 1) = 1.0;
        y(i) = std::log(v) - log_exponent * std::log(std::log(1.0 / d));
    }
    const Eigen::VectorXd s = A.colPivHouseholderQr().solve(y);
    return {s(0), log_exponent, s(1)};
}

SlopeFit fit_exponent_joint(std::span<const double> deltas, std::span<const double> values) {
    if (deltas.size() != values.size() || deltas.size() < 3) {
        throw DomainError("joint slope fit needs at least three (delta, value) pairs");
    }
    const auto n = static_cast<Eigen::Index>(deltas.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = deltas[static_cast<std::size_t>(i)];
        const double v = values[static_cast<std::size_t>(i)];
        if (!(d > 0.0 && d < 1.0) || !(v > 0.0)) {
            throw DomainError("slope fit needs 0 < delta < 1 and positive values");
        }
        A(i, 0) = std::log(d);
        A(i, 1) = std::log(std::log(1.0 / d));
        A(i, 2) = 1.0;
        y(i) = std::log(v);
    }
    const Eigen::VectorXd s = A.colPivHouseholderQr().solve(y);
    return {s(0), s(1), s(2)};
}

}  // namespace bgidx::fisher
