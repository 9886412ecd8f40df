#include "bgidx/harness.hpp"

#include "bgidx/errors.hpp"
#include "bgidx/rng.hpp"
#include "bgidx/statistics.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <thread>

namespace bgidx::harness {

namespace {

constexpr const char* kKinds[] = {"prelim", "final"};
constexpr const char* kFields[] = {"beta", "gamma"};

std::string column_name(const char* kind, const char* field, std::size_t i) {
    return std::string(kind) + "_" + field + std::to_string(i + 1);
}

const est::EstimateSet& pick(const ReplicateRow& row, std::string_view kind) {
    return kind == "prelim" ? row.preliminary : row.final;
}

std::optional<double> cell(const est::EstimateSet& set, std::string_view field, std::size_t i) {
    if (i >= set.entries.size() || !set.entries[i].usable()) {
        return std::nullopt;
    }
    return field == "beta" ? set.entries[i].beta : set.entries[i].gamma;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t index) {
    return derive_seed(master, index);
}

EstimatePair estimate_series(const sim::IncrementSeries& series, const sim::SamplingScheme& scheme,
                             const est::PrelimConfig& prelim, const est::ContrastConfig& contrast,
                             bool use_stop_rule) {
    EstimatePair out;
    out.preliminary = est::sanitize(est::preliminary_estimate(series, scheme, prelim));
    out.stop_count = est::stop_rule(out.preliminary, prelim.epsilon);

    est::EstimateSet start = out.preliminary;
    if (use_stop_rule) {
        start.entries.resize(out.stop_count);
        start.thresholds.resize(std::min(start.thresholds.size(), out.stop_count));
    }
    if (start.entries.empty() || start.usable_count() == 0) {
        out.final.u_n = start.u_n;
        out.final.side = start.side;
        out.final.entries.resize(start.entries.size());
        return out;
    }
    out.final = est::final_estimate(series, scheme, start, contrast);
    return out;
}

ReplicateRow run_replicate(const ExperimentConfig& config, std::size_t index) {
    ReplicateRow row;
    row.index = index;
    row.seed = replicate_seed(config.seed, index);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto series =
            sim::simulate_path(config.model, config.scheme, config.mode, row.seed, config.substeps);
        auto pair = estimate_series(series, config.scheme, config.prelim, config.contrast,
                                    config.use_stop_rule);
        row.preliminary = std::move(pair.preliminary);
        row.final = std::move(pair.final);
        row.stop_count = pair.stop_count;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::size_t default_jobs() {
    if (const char* env = std::getenv("BGIDX_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return 1;
}

std::vector<double> ResultTable::column(std::string_view name) const {
    const auto us = name.find('_');
    if (us == std::string_view::npos) {
        throw DomainError("bad column name '" + std::string(name) + "'");
    }
    const auto kind = name.substr(0, us);
    const auto rest = name.substr(us + 1);
    std::string_view field;
    for (const char* f : kFields) {
        if (rest.substr(0, std::string_view(f).size()) == f) {
            field = f;
        }
    }
    if ((kind != "prelim" && kind != "final") || field.empty()) {
        throw DomainError("bad column name '" + std::string(name) + "'");
    }
    std::size_t idx = 0;
    const auto digits = rest.substr(field.size());
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || idx < 1) {
        throw DomainError("bad column name '" + std::string(name) + "'");
    }
    std::vector<double> out;
    for (const auto& row : rows) {
        if (row.error) {
            continue;
        }
        if (auto v = cell(pick(row, kind), field, idx - 1)) {
            out.push_back(*v);
        }
    }
    return out;
}

std::vector<ColumnSummary> summarize(const ResultTable& table) {
    std::vector<ColumnSummary> out;
    for (const char* kind : kKinds) {
        for (std::size_t i = 0; i < table.j; ++i) {
            for (const char* field : kFields) {
                ColumnSummary s;
                s.column = column_name(kind, field, i);
                const auto v = table.column(s.column);
                s.count = v.size();
                if (!v.empty()) {
                    s.mean = stats::mean(v);
                    s.median = stats::median(v);
                    s.stddev = v.size() > 1 ? stats::stddev(v) : 0.0;
                    const auto& truth = std::string_view(field) == "beta" ? table.truth_betas
                                                                          : table.truth_intensities;
                    if (i < truth.size()) {
                        s.rmse = stats::rmse(v, truth[i]);
                    }
                }
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

ResultTable run_monte_carlo(const ExperimentConfig& config, std::size_t jobs) {
    config.validate();
    ResultTable table;
    table.j = config.prelim.j;
    table.truth_betas = config.true_betas();
    table.truth_intensities = config.true_intensities();
    table.rows.resize(config.replicates);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < config.replicates; i = next++) {
            table.rows[i] = run_replicate(config, i);
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, config.replicates));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    table.summary = summarize(table);
    return table;
}

void write_csv(std::ostream& out, const ResultTable& table) {
    out << "replicate,seed,u_n,stop_count";
    for (const char* kind : kKinds) {
        for (std::size_t i = 0; i < table.j; ++i) {
            for (const char* field : kFields) {
                out << ',' << column_name(kind, field, i);
            }
            out << ',' << kind << "_status" << i + 1;
        }
    }
    out << ",final_contrast,converged_starts,error,wall_seconds\r\n";
    for (const auto& row : table.rows) {
        out << row.index << ',' << row.seed << ','
            << (row.error ? "" : format_double(row.preliminary.u_n)) << ',' << row.stop_count;
        for (const char* kind : kKinds) {
            const auto& set = pick(row, kind);
            for (std::size_t i = 0; i < table.j; ++i) {
                for (const char* field : kFields) {
                    const auto v = row.error ? std::nullopt : cell(set, field, i);
                    out << ',' << (v ? format_double(*v) : "");
                }
                out << ',';
                if (!row.error && i < set.entries.size()) {
                    out << est::to_string(set.entries[i].status);
                }
            }
        }
        out << ',' << (row.final.contrast ? format_double(*row.final.contrast) : "") << ','
            << (row.final.optimizer ? std::to_string(row.final.optimizer->converged_starts) : "")
            << ',' << csv_field(row.error.value_or("")) << ',' << format_double(row.wall_seconds)
            << "\r\n";
    }
}

void write_summary_csv(std::ostream& out, const std::vector<ColumnSummary>& summary) {
    out << "column,count,mean,median,stddev,rmse\r\n";
    for (const auto& s : summary) {
        out << s.column << ',' << s.count << ',';
        if (s.count > 0) {
            out << format_double(s.mean) << ',' << format_double(s.median) << ','
                << format_double(s.stddev);
        } else {
            out << ",,";
        }
        out << ',' << (s.rmse ? format_double(*s.rmse) : "") << "\r\n";
    }
}

nlohmann::json to_json(const est::EstimateSet& set) {
    nlohmann::json j;
    j["u_n"] = set.u_n;
    j["side"] = set.side == counts::Side::Absolute   ? "absolute"
                : set.side == counts::Side::Positive ? "positive"
                                                     : "negative";
    j["thresholds"] = set.thresholds;
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& e : set.entries) {
        nlohmann::json x;
        x["status"] = est::to_string(e.status);
        if (e.usable()) {
            x["beta"] = e.beta;
            x["gamma"] = e.gamma;
        } else {
            x["beta"] = nullptr;
            x["gamma"] = nullptr;
        }
        entries.push_back(std::move(x));
    }
    if (set.contrast) {
        j["contrast"] = *set.contrast;
    }
    if (set.optimizer) {
        const auto& o = *set.optimizer;
        j["optimizer"] = {{"starts", o.starts},
                          {"converged_starts", o.converged_starts},
                          {"best_start", o.best_start},
                          {"iterations", o.iterations},
                          {"evaluations", o.evaluations},
                          {"start_contrast", o.start_contrast},
                          {"converged", o.converged}};
    }
    return j;
}

nlohmann::json to_json(const ResultTable& table) {
    nlohmann::json j;
    j["j"] = table.j;
    j["truth"] = {{"beta", table.truth_betas}, {"gamma", table.truth_intensities}};
    auto& rows = j["replicates"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json r;
        r["replicate"] = row.index;
        r["seed"] = row.seed;
        r["wall_seconds"] = row.wall_seconds;
        if (row.error) {
            r["error"] = *row.error;
        } else {
            r["preliminary"] = to_json(row.preliminary);
            r["final"] = to_json(row.final);
            r["stop_count"] = row.stop_count;
        }
        rows.push_back(std::move(r));
    }
    auto& sum = j["summary"] = nlohmann::json::array();
    for (const auto& s : table.summary) {
        nlohmann::json x = {{"column", s.column}, {"count", s.count}};
        if (s.count > 0) {
            x["mean"] = s.mean;
            x["median"] = s.median;
            x["stddev"] = s.stddev;
        }
        if (s.rmse) {
            x["rmse"] = *s.rmse;
        }
        sum.push_back(std::move(x));
    }
    return j;
}

}  // namespace bgidx::harness
