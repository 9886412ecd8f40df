#include "bgidx/counts.hpp"

#include "bgidx/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bgidx::counts {

namespace {

// Value compared against u for each side; negative means "never counts".
double signed_excess(double x, Side side) {
    switch (side) {
        case Side::Absolute:
            return std::abs(x);
        case Side::Positive:
            return x;
        case Side::Negative:
            return -x;
    }
    return x;
}

void check_threshold(double u) {
    if (!(u > 0.0)) {
        throw DomainError("count threshold must be positive");
    }
}

}  // namespace

std::uint64_t count_increments(std::span<const double> increments, double u, Side side) {
    check_threshold(u);
    return static_cast<std::uint64_t>(std::count_if(
        increments.begin(), increments.end(),
        [u, side](double x) { return signed_excess(x, side) > u; }));
}

TailCountCurve tail_curve(std::span<const double> increments, std::span<const double> thresholds,
                          Side side) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        check_threshold(thresholds[i]);
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw DomainError("tail_curve thresholds must be strictly increasing");
        }
    }
    // bucket[k] = number of values in (t_k, t_{k+1}] (last bucket open above)
    std::vector<std::uint64_t> bucket(thresholds.size(), 0);
    for (double x : increments) {
        const double v = signed_excess(x, side);
        // number of thresholds strictly below v
        const auto k = static_cast<std::size_t>(
            std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin());
        if (k > 0) {
            ++bucket[k - 1];
        }
    }
    TailCountCurve curve;
    curve.side = side;
    curve.points.resize(thresholds.size());
    std::uint64_t running = 0;
    for (std::size_t i = thresholds.size(); i-- > 0;) {
        running += bucket[i];
        curve.points[i] = {thresholds[i], running};
    }
    return curve;
}

std::uint64_t count_true_jumps(std::span<const sim::Jump> jumps, double u, double floor) {
    check_threshold(u);
    if (u < floor) {
        throw DomainError("threshold below the simulation floor: jumps there were not recorded");
    }
    return static_cast<std::uint64_t>(std::count_if(
        jumps.begin(), jumps.end(), [u](const sim::Jump& j) { return std::abs(j.size) > u; }));
}

std::uint64_t count_true_jumps(const sim::IncrementSeries& series, double u) {
    if (!series.jump_record) {
        throw DomainError("series carries no jump record");
    }
    return count_true_jumps(*series.jump_record, u, series.floor);
}

ExceedanceCounter::ExceedanceCounter(std::span<const double> increments, Side side)
    : side_(side) {
    sorted_.reserve(increments.size());
    for (double x : increments) {
        sorted_.push_back(signed_excess(x, side));
    }
    std::sort(sorted_.begin(), sorted_.end());
}

std::uint64_t ExceedanceCounter::count_above(double u) const {
    check_threshold(u);
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), u);
    return static_cast<std::uint64_t>(sorted_.end() - it);
}

}  // namespace bgidx::counts
