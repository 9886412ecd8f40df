#pragma once

#include "bgidx/estimators.hpp"
#include "bgidx/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bgidx::harness {

inline constexpr int kSchemaVersion = 1;

/// A stable component as written in a config: either the tail intensity or a
/// tail probability P(|increment| >= multiplier sqrt(eta delta)) to calibrate to.
struct ComponentConfig {
    double beta = 1.0;
    std::optional<double> tail_intensity;
    std::optional<double> tail_probability;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string name;
    sim::ModelSpec model;  // intensities resolved
    std::vector<ComponentConfig> components;
    double calibration_multiplier = 4.0;
    sim::SamplingScheme scheme;
    sim::SimulationMode mode = sim::ExactIncrements{};
    std::size_t substeps = 1;
    est::PrelimConfig prelim;
    est::ContrastConfig contrast;
    bool use_stop_rule = false;
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
    std::optional<std::string> output;

    void validate() const;
    /// True indices and integrated intensities A_T^i = T a_i.
    [[nodiscard]] std::vector<double> true_betas() const;
    [[nodiscard]] std::vector<double> true_intensities() const;
};

/// Parse a JSON config. Errors are ConfigError with a line or field diagnostic.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Tail intensity of each configured component (calibrated where requested).
[[nodiscard]] double resolve_intensity(const ComponentConfig& c, const sim::VolatilitySpec& vol,
                                       double delta, double multiplier);

struct ReplicateRow {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    est::EstimateSet preliminary;  // after sanitize
    est::EstimateSet final;
    std::size_t stop_count = 0;    // stop-rule count on the preliminary estimates
    std::optional<std::string> error;
    double wall_seconds = 0.0;
};

struct ColumnSummary {
    std::string column;
    std::size_t count = 0;  // usable values
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    std::optional<double> rmse;  // against the truth when known
};

struct ResultTable {
    std::size_t j = 0;
    std::vector<ReplicateRow> rows;
    std::vector<double> truth_betas;
    std::vector<double> truth_intensities;
    std::vector<ColumnSummary> summary;

    /// Usable values of column "prelim_beta1", "final_gamma2", ... in row order.
    [[nodiscard]] std::vector<double> column(std::string_view name) const;
};

/// Seed of replicate `index`: derive_seed(master, index).
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t master, std::size_t index);

/// One end-to-end replicate; failures are recorded in the row.
[[nodiscard]] ReplicateRow run_replicate(const ExperimentConfig& config, std::size_t index);

/// Estimation on an existing series (preliminary, sanitize, optional stop
/// rule, final). Without a usable start the final set is all failed entries.
struct EstimatePair {
    est::EstimateSet preliminary;
    est::EstimateSet final;
    std::size_t stop_count = 0;
};
[[nodiscard]] EstimatePair estimate_series(const sim::IncrementSeries& series,
                                           const sim::SamplingScheme& scheme,
                                           const est::PrelimConfig& prelim,
                                           const est::ContrastConfig& contrast,
                                           bool use_stop_rule);

/// Job count from BGIDX_JOBS, else 1.
[[nodiscard]] std::size_t default_jobs();

/// All replicates on up to `jobs` threads; rows ordered by replicate index.
[[nodiscard]] ResultTable run_monte_carlo(const ExperimentConfig& config, std::size_t jobs = 1);

[[nodiscard]] std::vector<ColumnSummary> summarize(const ResultTable& table);

/// RFC 4180 CSV: header plus one row per replicate. Summary as a second table.
void write_csv(std::ostream& out, const ResultTable& table);
void write_summary_csv(std::ostream& out, const std::vector<ColumnSummary>& summary);
[[nodiscard]] nlohmann::json to_json(const ResultTable& table);
[[nodiscard]] nlohmann::json to_json(const est::EstimateSet& est);

/// Quote a CSV field when it contains a comma, quote or line break.
[[nodiscard]] std::string csv_field(std::string_view s);

/// Shortest decimal that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

}  // namespace bgidx::harness
