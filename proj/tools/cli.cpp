#include "cli.hpp"

#include "bgidx/errors.hpp"
#include "bgidx/fisher.hpp"
#include "bgidx/harness.hpp"
#include "bgidx/rates.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

namespace bgidx::cli {

namespace {

using harness::format_double;

enum class Format { Csv, Json };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::size_t jobs = harness::default_jobs();
};

Format parse_format(const std::string& s, Format fallback) {
    if (s.empty()) return fallback;
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw ConfigError("--format must be csv or json");
}

// Writes to the --out file when given, else to the console stream.
void emit(const std::string& path, std::ostream& console,
          const std::function<void(std::ostream&)>& body, bool binary = false) {
    if (path.empty()) {
        body(console);
        return;
    }
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) {
        throw ConfigError("cannot open output file '" + path + "'");
    }
    body(f);
    if (!f) {
        throw ConfigError("write failed for '" + path + "'");
    }
}

harness::ExperimentConfig config_or_default(const Common& c) {
    harness::ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = harness::load_config(c.config);
    }
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    return cfg;
}

void print_estimates_csv(std::ostream& os, const harness::EstimatePair& p) {
    os << "kind,index,beta,gamma,status\r\n";
    auto rows = [&](const char* kind, const est::EstimateSet& s) {
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            const auto& e = s.entries[i];
            os << kind << ',' << i + 1 << ',' << (e.usable() ? format_double(e.beta) : "") << ','
               << (e.usable() ? format_double(e.gamma) : "") << ',' << est::to_string(e.status)
               << "\r\n";
        }
    };
    rows("preliminary", p.preliminary);
    rows("final", p.final);
}

int cmd_simulate(const Common& c, std::size_t replicate, std::ostream& out) {
    const auto cfg = config_or_default(c);
    if (c.config.empty()) {
        throw ConfigError("simulate needs --config");
    }
    if (c.out.empty()) {
        throw ConfigError("simulate needs --out (binary increments file)");
    }
    const auto series = sim::simulate_path(cfg.model, cfg.scheme, cfg.mode,
                                           harness::replicate_seed(cfg.seed, replicate),
                                           cfg.substeps);
    emit(c.out, out, [&](std::ostream& os) { sim::write_increments(os, series); }, true);
    return kExitOk;
}

int cmd_estimate(const Common& c, const std::string& input, std::ostream& out) {
    const auto cfg = config_or_default(c);
    std::ifstream in(input, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open increments file '" + input + "'");
    }
    const auto series = sim::read_increments(in);
    const auto scheme = sim::SamplingScheme::with_count(series.increments.size(), series.delta);
    const auto pair =
        harness::estimate_series(series, scheme, cfg.prelim, cfg.contrast, cfg.use_stop_rule);
    emit(c.out, out, [&](std::ostream& os) {
        if (parse_format(c.format, Format::Json) == Format::Json) {
            nlohmann::json j;
            j["n"] = series.increments.size();
            j["delta"] = series.delta;
            j["preliminary"] = harness::to_json(pair.preliminary);
            j["final"] = harness::to_json(pair.final);
            j["stop_count"] = pair.stop_count;
            os << j.dump(2) << '\n';
        } else {
            print_estimates_csv(os, pair);
        }
    });
    return kExitOk;
}

int cmd_montecarlo(const Common& c, const std::string& summary_path, std::ostream& out) {
    if (c.config.empty()) {
        throw ConfigError("montecarlo needs --config");
    }
    const auto cfg = config_or_default(c);
    const auto table = harness::run_monte_carlo(cfg, c.jobs);
    const std::string path = c.out.empty() ? cfg.output.value_or("") : c.out;
    emit(path, out, [&](std::ostream& os) {
        if (parse_format(c.format, Format::Csv) == Format::Json) {
            os << harness::to_json(table).dump(2) << '\n';
        } else {
            harness::write_csv(os, table);
        }
    });
    if (!summary_path.empty()) {
        emit(summary_path, out,
             [&](std::ostream& os) { harness::write_summary_csv(os, table.summary); });
    }
    return kExitOk;
}

struct FisherArgs {
    fisher::ParametricModel model;
    std::vector<double> deltas = {1e-2, 1e-3, 1e-4, 1e-5};
};

int cmd_fisher(const Common& c, const FisherArgs& a, std::ostream& out) {
    a.model.validate();
    if (a.deltas.size() < 2) {
        throw ConfigError("--deltas needs at least two values");
    }
    for (double d : a.deltas) {
        if (!(d > 0.0 && d < 1.0)) {
            throw ConfigError("--deltas values must lie in (0, 1)");
        }
    }
    const auto ladder = fisher::fisher_ladder(a.model, a.deltas, c.jobs);
    emit(c.out, out, [&](std::ostream& os) {
        if (parse_format(c.format, Format::Csv) == Format::Csv) {
            os << "delta";
            for (auto p : fisher::kAllParameters) {
                os << ",I_" << fisher::to_string(p) << ",I_" << fisher::to_string(p) << "_fd";
            }
            os << ",captured_mass,half_width,N,accurate\r\n";
            for (const auto& r : ladder) {
                os << format_double(r.delta);
                for (const auto& e : r.entries) {
                    os << ',' << format_double(e.value) << ',' << format_double(e.value_fd);
                }
                os << ',' << format_double(r.captured_mass) << ',' << format_double(r.half_width)
                   << ',' << r.N << ',' << (r.accurate ? "true" : "false") << "\r\n";
            }
            return;
        }
        nlohmann::json j;
        j["model"] = {{"c", a.model.c},         {"beta1", a.model.beta1}, {"a1", a.model.a1},
                      {"beta2", a.model.beta2}, {"a2", a.model.a2}};
        auto& rows = j["ladder"] = nlohmann::json::array();
        for (const auto& r : ladder) {
            nlohmann::json row = {{"delta", r.delta},
                                  {"captured_mass", r.captured_mass},
                                  {"half_width", r.half_width},
                                  {"N", r.N},
                                  {"accurate", r.accurate}};
            for (const auto& e : r.entries) {
                row[std::string(fisher::to_string(e.which))] = {
                    {"value", e.value}, {"value_fd", e.value_fd},
                    {"score_rel_l2", e.score_rel_l2}, {"far_tail", e.far_tail}};
            }
            rows.push_back(std::move(row));
        }
        auto& fits = j["exponents"] = nlohmann::json::object();
        for (auto p : fisher::kAllParameters) {
            std::vector<double> v;
            for (const auto& r : ladder) {
                v.push_back(r.get(p).value);
            }
            const auto th = fisher::theoretical_exponents(a.model, p);
            auto& f = fits[std::string(fisher::to_string(p))] = {{"theory_delta", th.delta},
                                                                 {"theory_log", th.log}};
            if (a.deltas.size() >= 2) {
                f["fitted_delta"] = fisher::fit_exponent(a.deltas, v, th.log).exponent;
            }
            if (a.deltas.size() >= 3) {
                const auto joint = fisher::fit_exponent_joint(a.deltas, v);
                f["joint_delta"] = joint.exponent;
                f["joint_log"] = joint.log_exponent;
            }
        }
        os << j.dump(2) << '\n';
    });
    return kExitOk;
}

struct RatesArgs {
    std::string beta1 = "1";
    std::string beta2 = "0.75";
    std::optional<double> rho;
};

std::optional<Rational> try_exact(const std::string& s) {
    try {
        return Rational::parse(s);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

double to_number(const std::string& s, const char* flag) {
    if (auto r = try_exact(s)) {
        return r->to_double();
    }
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(flag) + " must be a number or p/q");
}

int cmd_rates(const Common& c, const RatesArgs& a, std::ostream& out) {
    const double b1 = to_number(a.beta1, "--beta1");
    const double b2 = to_number(a.beta2, "--beta2");
    const auto r1 = try_exact(a.beta1);
    const auto r2 = try_exact(a.beta2);
    const auto rates = rates::optimal_rates(b1, b2);
    const auto cmp = rates::rate_comparison(b1, b2, a.rho);
    std::optional<rates::ExactOptimalRates> exact;
    std::optional<rates::ExactRateComparison> exact_cmp;
    if (r1 && r2) {
        exact = rates::optimal_rates_exact(*r1, *r2);
        exact_cmp = rates::rate_comparison_exact(*r1, *r2);
    }
    const std::pair<const char*, const rates::RateExponents*> rows[] = {
        {"beta1", &rates.beta1}, {"a1", &rates.a1}, {"beta2", &rates.beta2}, {"a2", &rates.a2}};
    auto exact_row = [&](std::size_t k) -> const rates::ExactRateExponents* {
        if (!exact) return nullptr;
        const rates::ExactRateExponents* e[] = {&exact->beta1, &exact->a1, &exact->beta2,
                                                &exact->a2};
        return e[k];
    };

    emit(c.out, out, [&](std::ostream& os) {
        if (parse_format(c.format, Format::Csv) == Format::Json) {
            nlohmann::json j;
            j["beta1"] = b1;
            j["beta2"] = b2;
            j["second_index"] = est::to_string(rates.second);
            for (std::size_t k = 0; k < 4; ++k) {
                nlohmann::json e = {{"delta", rows[k].second->delta},
                                    {"log", rows[k].second->log}};
                if (auto x = exact_row(k)) {
                    e["delta_exact"] = x->delta.str();
                    e["log_exact"] = x->log.str();
                }
                j["optimal"][rows[k].first] = e;
            }
            auto& cj = j["contrast"];
            cj["gamma"] = cmp.gamma;
            cj["gamma_prime"] = cmp.gamma_prime;
            cj["ratio"] = cmp.ratio;
            cj["branch"] = rates::to_string(cmp.branch);
            cj["rho_max"] = cmp.rho_max;
            if (exact_cmp) {
                cj["ratio_exact"] = exact_cmp->ratio.str();
                cj["rho_max_exact"] = exact_cmp->rho_max.str();
                cj["gamma_exact"] = {exact_cmp->gamma[0].str(), exact_cmp->gamma[1].str()};
                cj["gamma_prime_exact"] = {exact_cmp->gamma_prime[0].str(),
                                           exact_cmp->gamma_prime[1].str()};
            }
            if (cmp.rho) {
                cj["rho"] = *cmp.rho;
                cj["realized"] = cmp.realized;
                cj["slack"] = cmp.slack;
            }
            j["branch_point"] = rates::branch_point();
            j["ratio_limit_beta1_to_2"] = rates::ratio_limit_at_two().str();
            os << j.dump(2) << '\n';
            return;
        }
        os << "parameter,delta_exponent,log_exponent,delta_exact,log_exact\r\n";
        for (std::size_t k = 0; k < 4; ++k) {
            os << rows[k].first << ',' << format_double(rows[k].second->delta) << ','
               << format_double(rows[k].second->log);
            if (auto x = exact_row(k)) {
                os << ',' << x->delta.str() << ',' << x->log.str();
            } else {
                os << ",,";
            }
            os << "\r\n";
        }
        os << "\r\n";
        os << "index,gamma,gamma_prime,ratio,branch,rho_max,gamma_exact,gamma_prime_exact,"
              "ratio_exact";
        if (cmp.rho) {
            os << ",rho,realized,slack";
        }
        os << "\r\n";
        for (std::size_t i = 0; i < 2; ++i) {
            os << i + 1 << ',' << format_double(cmp.gamma[i]) << ','
               << format_double(cmp.gamma_prime[i]) << ',' << format_double(cmp.ratio) << ','
               << rates::to_string(cmp.branch) << ',' << format_double(cmp.rho_max);
            if (exact_cmp) {
                os << ',' << exact_cmp->gamma[i].str() << ',' << exact_cmp->gamma_prime[i].str()
                   << ',' << exact_cmp->ratio.str();
            } else {
                os << ",,,";
            }
            if (cmp.rho) {
                os << ',' << format_double(*cmp.rho) << ',' << format_double(cmp.realized[i])
                   << ',' << format_double(cmp.slack[i]);
            }
            os << "\r\n";
        }
        os << "\r\n";
        os << "quantity,value,exact\r\n";
        os << "branch_point," << format_double(rates::branch_point()) << ",(sqrt(97)-1)/6\r\n";
        os << "ratio_limit_beta1_to_2," << format_double(rates::ratio_limit_at_two().to_double())
           << ',' << rates::ratio_limit_at_two().str() << "\r\n";
        os << "second_index," << est::to_string(rates.second) << ",\r\n";
    });
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Successive Blumenthal-Getoor index estimation", "bgidx"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) {
            sub->add_option("--config", common.config, "JSON experiment config");
            sub->add_option("--seed", common.seed, "master seed (overrides the config)");
        }
        sub->add_option("--out", common.out, "output file (default: stdout)");
        sub->add_option("--format", common.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--jobs", common.jobs, "worker threads (default: BGIDX_JOBS or 1)")
            ->check(CLI::PositiveNumber);
    };

    auto* simulate = app.add_subcommand("simulate", "simulate increments to a binary file");
    add_common(simulate, true);
    std::size_t replicate = 0;
    simulate->add_option("--replicate", replicate, "replicate index for the sub-seed");

    auto* estimate = app.add_subcommand("estimate", "estimate indices from an increments file");
    add_common(estimate, true);
    std::string input;
    estimate->add_option("--in,input", input, "binary increments file")->required();

    auto* montecarlo = app.add_subcommand("montecarlo", "run a Monte Carlo experiment");
    add_common(montecarlo, true);
    std::string summary_path;
    montecarlo->add_option("--summary", summary_path, "summary CSV file");

    auto* fisher_cmd = app.add_subcommand("fisher", "Fisher information on a Delta ladder");
    add_common(fisher_cmd, false);
    FisherArgs fa;
    fisher_cmd->add_option("--c", fa.model.c, "Brownian variance");
    fisher_cmd->add_option("--beta1", fa.model.beta1);
    fisher_cmd->add_option("--a1", fa.model.a1);
    fisher_cmd->add_option("--beta2", fa.model.beta2);
    fisher_cmd->add_option("--a2", fa.model.a2);
    fisher_cmd->add_option("--deltas", fa.deltas, "Delta ladder")->delimiter(',');

    auto* rates_cmd = app.add_subcommand("rates", "rate exponent tables");
    add_common(rates_cmd, false);
    RatesArgs ra;
    rates_cmd->add_option("--beta1", ra.beta1, "decimal or p/q");
    rates_cmd->add_option("--beta2", ra.beta2, "decimal or p/q");
    rates_cmd->add_option("--rho", ra.rho, "truncation exponent for the realized rates");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(common, replicate, out);
        if (estimate->parsed()) return cmd_estimate(common, input, out);
        if (montecarlo->parsed()) return cmd_montecarlo(common, summary_path, out);
        if (fisher_cmd->parsed()) return cmd_fisher(common, fa, out);
        if (rates_cmd->parsed()) return cmd_rates(common, ra, out);
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

}  // namespace bgidx::cli
