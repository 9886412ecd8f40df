#pragma once

#include "bgidx/simulate.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bgidx::counts {

/// Which increments count as exceedances of u: |x| > u, x > u or x < -u.
enum class Side { Absolute, Positive, Negative };

struct TailPoint {
    double threshold = 0.0;
    std::uint64_t count = 0;
};

/// Exceedance counts U(u) at strictly increasing thresholds.
struct TailCountCurve {
    std::vector<TailPoint> points;
    Side side = Side::Absolute;

    [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Number of increments strictly beyond u on `side`.
[[nodiscard]] std::uint64_t count_increments(std::span<const double> increments, double u,
                                             Side side = Side::Absolute);

/// Counts at every threshold in one pass (bucketing by binary search).
/// Thresholds must be positive and strictly increasing.
[[nodiscard]] TailCountCurve tail_curve(std::span<const double> increments,
                                        std::span<const double> thresholds,
                                        Side side = Side::Absolute);

/// Recorded jumps with |size| > u. Throws DomainError when u < floor, since
/// jumps below the simulation floor were never recorded.
[[nodiscard]] std::uint64_t count_true_jumps(std::span<const sim::Jump> jumps, double u,
                                             double floor);
[[nodiscard]] std::uint64_t count_true_jumps(const sim::IncrementSeries& series, double u);

/// Sorted view of the signed magnitudes for repeated threshold queries.
class ExceedanceCounter {
public:
    ExceedanceCounter(std::span<const double> increments, Side side);

    /// Same value as count_increments(increments, u, side), in O(log n).
    [[nodiscard]] std::uint64_t count_above(double u) const;

    [[nodiscard]] Side side() const { return side_; }

private:
    std::vector<double> sorted_;
    Side side_;
};

}  // namespace bgidx::counts
