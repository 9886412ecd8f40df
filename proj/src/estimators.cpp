#include "bgidx/estimators.hpp"

#include "bgidx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bgidx::est {

void PrelimConfig::validate() const {
    if (j < 1) {
        throw DomainError("number of indices j must be at least 1");
    }
    if (!(gamma > 1.0)) {
        throw DomainError("ratio gamma must exceed 1");
    }
    if (!(epsilon > 0.0)) {
        throw DomainError("separation epsilon must be positive");
    }
    if (!(rho > 0.0) || (!allow_large_rho && rho > 2.0 / 11.0 + 1e-15)) {
        throw DomainError("rho must lie in (0, 2/11] unless allow_large_rho is set");
    }
    std::visit(
        [](const auto& rule) {
            using T = std::decay_t<decltype(rule)>;
            if constexpr (std::is_same_v<T, TheoryThreshold>) {
                if (!(rule.K > 0.0)) {
                    throw DomainError("threshold constant K must be positive");
                }
            } else if constexpr (std::is_same_v<T, PracticalThreshold>) {
                if (!(rule.alpha > 0.0) || (rule.eta && !(*rule.eta > 0.0))) {
                    throw DomainError("practical threshold needs alpha > 0 and eta > 0");
                }
            } else {
                if (!(rule.u > 0.0)) {
                    throw DomainError("explicit threshold must be positive");
                }
            }
        },
        threshold);
}

double estimate_continuous_variance(std::span<const double> increments, double delta) {
    if (increments.size() < 2 || !(delta > 0.0)) {
        throw DomainError("variance estimate needs at least two increments and delta > 0");
    }
    const double horizon = static_cast<double>(increments.size()) * delta;
    double bipower = 0.0;
    for (std::size_t i = 1; i < increments.size(); ++i) {
        bipower += std::abs(increments[i]) * std::abs(increments[i - 1]);
    }
    double v = 0.5 * std::numbers::pi * bipower / horizon;
    for (int iter = 0; iter < 5; ++iter) {
        const double cut = 4.0 * std::sqrt(v * delta);
        double sum = 0.0;
        for (double x : increments) {
            if (std::abs(x) <= cut) {
                sum += x * x;
            }
        }
        v = sum / horizon;
    }
    return v;
}

double default_threshold(const sim::SamplingScheme& scheme, const PrelimConfig& config,
                         std::span<const double> increments) {
    config.validate();
    const double delta = scheme.delta;
    if (!(delta > 0.0)) {
        throw DomainError("sampling mesh must be positive");
    }
    if (const auto* t = std::get_if<TheoryThreshold>(&config.threshold)) {
        return t->K * std::pow(delta, config.rho);
    }
    if (const auto* p = std::get_if<PracticalThreshold>(&config.threshold)) {
        double eta = 0.0;
        if (p->eta) {
            eta = *p->eta;
        } else if (!increments.empty()) {
            eta = estimate_continuous_variance(increments, delta);
        } else {
            throw DomainError("practical threshold needs eta or the increments to estimate it");
        }
        return p->alpha * std::sqrt(eta * delta);
    }
    return std::get<ExplicitThreshold>(config.threshold).u;
}

std::vector<double> aux_thresholds(double u_n, double epsilon, std::size_t j) {
    if (!(u_n > 0.0 && u_n < 1.0)) {
        throw DomainError("auxiliary thresholds need 0 < u_n < 1");
    }
    if (!(epsilon > 0.0)) {
        throw DomainError("separation epsilon must be positive");
    }
    std::vector<double> out(j);
    double exponent = 1.0;
    for (std::size_t i = 0; i < j; ++i) {
        out[i] = (i == 0) ? u_n : std::pow(u_n, exponent);
        exponent *= 0.5 * epsilon;
    }
    return out;
}

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Ok:
            return "ok";
        case Status::Clipped:
            return "clipped";
        case Status::Failed:
            return "failed";
    }
    return "unknown";
}

std::size_t EstimateSet::usable_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.usable(); }));
}

EstimateSet preliminary_from_counts(const CountFunction& count, double u_n,
                                    const PrelimConfig& config) {
    config.validate();
    EstimateSet est;
    est.u_n = u_n;
    est.side = config.side;
    est.thresholds = aux_thresholds(u_n, config.epsilon, config.j);
    est.entries.resize(config.j);
    const double g = config.gamma;
    const double log_g = std::log(g);

    for (std::size_t k = 0; k < config.j; ++k) {
        IndexEstimate& out = est.entries[k];
        const double uk = est.thresholds[k];
        bool previous_failed = false;
        for (std::size_t i = 0; i < k; ++i) {
            previous_failed = previous_failed || !est.entries[i].usable();
        }
        if (previous_failed) {
            continue;
        }
        // Elementary symmetric sums e_l of gamma^beta_i, i < k: the inner
        // subset sum over I(k-1, l).
        std::vector<double> e(k + 1, 0.0);
        e[0] = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double y = std::pow(g, est.entries[i].beta);
            for (std::size_t l = i + 1; l > 0; --l) {
                e[l] += y * e[l - 1];
            }
        }
        auto alternating = [&](double x) {
            double sum = 0.0;
            double scale = x;
            for (std::size_t l = 0; l <= k; ++l) {
                const double sign = (l % 2 == 0) ? 1.0 : -1.0;
                sum += sign * count(scale * uk) * e[l];
                scale *= g;
            }
            return sum;
        };
        // both sums carry the sign (-1)^k in the limit; only their ratio matters
        const double ratio = alternating(1.0) / alternating(g);
        if (!(ratio > 0.0 && std::isfinite(ratio))) {
            continue;
        }
        out.beta = std::log(ratio) / log_g;
        double residual = count(uk);
        for (std::size_t i = 0; i < k; ++i) {
            residual -= est.entries[i].gamma * std::pow(uk, -est.entries[i].beta);
        }
        out.gamma = std::pow(uk, out.beta) * residual;
        out.status = Status::Ok;
    }
    return est;
}

EstimateSet preliminary_estimate(const sim::IncrementSeries& series,
                                 const sim::SamplingScheme& scheme, const PrelimConfig& config) {
    const double u_n = default_threshold(scheme, config, series.increments);
    const counts::ExceedanceCounter counter(series.increments, config.side);
    return preliminary_from_counts(
        [&counter](double u) { return static_cast<double>(counter.count_above(u)); }, u_n,
        config);
}

EstimateSet sanitize(EstimateSet est) {
    for (auto& e : est.entries) {
        if (e.usable() && e.gamma < 0.0) {
            e.gamma = 0.0;
            e.status = Status::Clipped;
        }
    }
    auto failed_begin = std::stable_partition(est.entries.begin(), est.entries.end(),
                                              [](const auto& e) { return e.usable(); });
    std::stable_sort(est.entries.begin(), failed_begin,
                     [](const auto& l, const auto& r) { return l.beta > r.beta; });
    return est;
}

std::size_t stop_rule(const EstimateSet& est, double epsilon) {
    if (est.entries.empty() || !est.entries.front().usable()) {
        return 0;
    }
    const double cutoff = epsilon + 0.5 * est.entries.front().beta;
    for (std::size_t i = 0; i < est.entries.size(); ++i) {
        const auto& e = est.entries[i];
        if (!e.usable() || e.beta <= cutoff) {
            return i;
        }
    }
    return est.entries.size();
}

double bias_constant(std::span<const double> betas, std::span<const double> intensities,
                     std::size_t i, double gamma) {
    const std::size_t j = betas.size();
    if (intensities.size() != j) {
        throw DomainError("bias_constant: betas and intensities differ in length");
    }
    if (i < 1 || i + 1 > j) {
        throw DomainError("bias_constant: index must satisfy 1 <= i <= j-1");
    }
    if (!(gamma > 1.0)) {
        throw DomainError("bias_constant: gamma must exceed 1");
    }
    for (std::size_t l = 0; l < j; ++l) {
        if (!(intensities[l] > 0.0)) {
            throw DomainError("bias_constant: intensities must be positive");
        }
        if (l > 0 && !(betas[l] < betas[l - 1])) {
            throw DomainError("bias_constant: betas must be strictly decreasing");
        }
    }
    // 0-based: beta_{i+1} = betas[i], A^i = intensities[i-1]
    double num = 1.0;
    for (std::size_t l = 0; l < i; ++l) {
        num *= std::pow(gamma, betas[l] - betas[i]) - 1.0;
    }
    double den = 1.0;
    for (std::size_t l = 0; l + 1 < i; ++l) {
        den *= std::pow(gamma, betas[l] - betas[i - 1]) - 1.0;
    }
    return intensities[i] / (intensities[i - 1] * std::log(gamma)) * num / den;
}

std::string_view to_string(Identifiability s) {
    switch (s) {
        case Identifiability::Identifiable:
            return "identifiable";
        case Identifiability::Boundary:
            return "boundary";
        case Identifiability::NotIdentifiable:
            return "not-identifiable";
    }
    return "unknown";
}

std::vector<Identifiability> identifiable_indices(std::span<const double> betas) {
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0 && betas[i] < 2.0)) {
            throw DomainError("indices must lie in (0, 2)");
        }
        if (i > 0 && !(betas[i] < betas[i - 1])) {
            throw DomainError("indices must be strictly decreasing");
        }
    }
    std::vector<Identifiability> out;
    out.reserve(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (i == 0) {
            out.push_back(Identifiability::Identifiable);
            continue;
        }
        const double half = 0.5 * betas[0];
        if (betas[i] > half) {
            out.push_back(Identifiability::Identifiable);
        } else if (betas[i] == half) {
            out.push_back(Identifiability::Boundary);
        } else {
            out.push_back(Identifiability::NotIdentifiable);
        }
    }
    return out;
}

}  // namespace bgidx::est
