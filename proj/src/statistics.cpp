#include "bgidx/statistics.hpp"

#include "bgidx/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bgidx::stats {

namespace {

void need(std::span<const double> x, std::size_t n, const char* what) {
    if (x.size() < n) {
        throw DomainError(std::string(what) + ": not enough values");
    }
}

}  // namespace

double mean(std::span<const double> x) {
    need(x, 1, "mean");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    need(x, 2, "variance");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double standard_error(std::span<const double> x) {
    return stddev(x) / std::sqrt(static_cast<double>(x.size()));
}

double median(std::span<const double> x) {
    need(x, 1, "median");
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mad(std::span<const double> x) {
    const double m = median(x);
    std::vector<double> d;
    d.reserve(x.size());
    for (double v : x) {
        d.push_back(std::abs(v - m));
    }
    return median(d);
}

double rmse(std::span<const double> x, double truth) {
    need(x, 1, "rmse");
    double s = 0.0;
    for (double v : x) {
        s += (v - truth) * (v - truth);
    }
    return std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) {
        return 1.0;
    }
    if (lambda < 0.2) {
        return 1.0;  // series converges poorly; Q is 1 to double precision here
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-17) {
            break;
        }
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    need(a, 1, "ks_two_sample");
    need(b, 1, "ks_two_sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

TestResult spearman_increasing(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DomainError("spearman: samples differ in length");
    }
    need(x, 3, "spearman");
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mx = mean(rx);
    const double my = mean(ry);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return {0.0, 1.0};
    }
    const double r = sxy / std::sqrt(sxx * syy);
    const double dof = static_cast<double>(x.size()) - 2.0;
    if (std::abs(r) >= 1.0) {
        return {r, r > 0.0 ? 0.0 : 1.0};
    }
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    const boost::math::students_t dist(dof);
    return {r, boost::math::cdf(boost::math::complement(dist, t))};
}

double chi_square_sf(double x, double dof) {
    if (!(dof > 0.0)) {
        throw DomainError("chi-square needs positive degrees of freedom");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

TestResult chi_square(std::span<const double> observed, std::span<const double> expected,
                      std::size_t fitted_parameters) {
    if (observed.size() != expected.size()) {
        throw DomainError("chi_square: observed and expected differ in length");
    }
    if (observed.size() < fitted_parameters + 2) {
        throw DomainError("chi_square: not enough bins");
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0)) {
            throw DomainError("chi_square: expected counts must be positive");
        }
        stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    }
    const double dof = static_cast<double>(observed.size() - 1 - fitted_parameters);
    return {stat, chi_square_sf(stat, dof)};
}

}  // namespace bgidx::stats
