#pragma once

#include <cstdint>
#include <random>

namespace bgidx {

/// SplitMix64 finalizer. Used as the stable hash behind every seed split.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derived stream seed: splitmix64(splitmix64(master) ^ splitmix64(index + 1)).
/// The rule is part of the reproducibility contract; changing it changes
/// every simulated path.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 1));
}

/// Random stream over mt19937_64. Uniform, normal and exponential variates
/// are produced by explicit transforms so a given seed yields the same
/// sequence on every platform; only poisson() defers to the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Marsaglia polar method, one value cached).
    double normal() noexcept;

    /// Exponential with unit mean.
    double exponential() noexcept;

    std::uint64_t poisson(double mean);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bgidx
