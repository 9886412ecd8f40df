// Acceptance run: one PASS/FAIL line per criterion.
//
// Criteria listed in kKnownFailures fail for documented reasons (see
// README.md, "Known failures"); they are still evaluated and reported. The exit
// status is nonzero when any other criterion fails or a criterion throws.

#include "bgidx/counts.hpp"
#include "bgidx/errors.hpp"
#include "bgidx/estimators.hpp"
#include "bgidx/fisher.hpp"
#include "bgidx/harness.hpp"
#include "bgidx/rates.hpp"
#include "bgidx/rational.hpp"
#include "bgidx/statistics.hpp"
#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace bgidx;

namespace {

const std::set<int> kKnownFailures = {2, 5, 7};

// Pilot: configs/desk_scale.json with seed 777, M = 100 (median +- 3 MAD).
constexpr double kPilotSeed = 777;
constexpr double kBandBeta1Lo = 1.9999999999999964;
constexpr double kBandBeta1Hi = 2.0000000000000018;
constexpr double kBandBeta2Lo = 0.8658576094664365;
constexpr double kBandBeta2Hi = 0.9919363562035737;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

struct Context {
    std::string config_dir;
    std::size_t jobs = 1;
    std::vector<std::string> suites;
    // criterion 2 replicate set, shared with 4 and 5
    std::optional<harness::ResultTable> desk;
    harness::ExperimentConfig desk_config;

    const harness::ResultTable& desk_table() {
        if (!desk) {
            desk_config = harness::load_config(config_dir + "/desk_scale.json");
            desk = harness::run_monte_carlo(desk_config, jobs);
        }
        return *desk;
    }
};

// Preliminary and final beta of index i over the replicates where both are usable.
std::pair<std::vector<double>, std::vector<double>> paired(const harness::ResultTable& t,
                                                          std::size_t i) {
    std::vector<double> pre, fin;
    for (const auto& row : t.rows) {
        if (row.error) continue;
        if (row.preliminary.entries.size() <= i || row.final.entries.size() <= i) continue;
        const auto& p = row.preliminary.entries[i];
        const auto& f = row.final.entries[i];
        if (!p.usable() || !f.usable()) continue;
        pre.push_back(p.beta);
        fin.push_back(f.beta);
    }
    return {pre, fin};
}

Verdict criterion1(Context&) {
    est::ContrastConfig cfg;
    est::ContrastData d;
    d.thresholds = est::contrast_thresholds(0.01, cfg);
    for (double u : d.thresholds) d.counts.push_back(10.0 * std::pow(u, -1.0) + 5.0 * std::pow(u, -0.75));
    est::EstimateSet start;
    start.entries = {{0.95, 12.0, est::Status::Ok}, {0.7, 4.0, est::Status::Ok}};
    const auto t0 = std::chrono::steady_clock::now();
    const auto e = est::final_estimate_from_data(d, start, cfg);
    const double secs = seconds_since(t0);
    const double truth[4] = {1.0, 10.0, 0.75, 5.0};
    double worst = 0.0;
    if (e.usable_count() == 2) {
        const double got[4] = {e.entries[0].beta, e.entries[0].gamma, e.entries[1].beta, e.entries[1].gamma};
        for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(got[k] - truth[k]));
    } else {
        worst = INFINITY;
    }
    return {worst <= 1e-6 && secs < 1.0 && d.thresholds.size() == 10,
            "max abs error " + fmt(worst, 3) + ", " + fmt(secs * 1e3, 3) + " ms, " +
                std::to_string(d.thresholds.size()) + " thresholds"};
}

Verdict criterion2(Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& t = ctx.desk_table();
    const double secs = seconds_since(t0);
    const auto b1 = t.column("final_beta1");
    const auto b2 = t.column("final_beta2");
    if (b1.empty() || b2.empty()) return {false, "no usable final estimates"};
    const double m1 = stats::median(b1), m2 = stats::median(b2);
    const bool bands_hold_truth = kBandBeta1Lo <= 1.0 && 1.0 <= kBandBeta1Hi &&
                                  kBandBeta2Lo <= 0.75 && 0.75 <= kBandBeta2Hi;
    const bool in1 = kBandBeta1Lo <= m1 && m1 <= kBandBeta1Hi;
    const bool in2 = kBandBeta2Lo <= m2 && m2 <= kBandBeta2Hi;
    return {bands_hold_truth && in1 && in2,
            "median beta1 " + fmt(m1, 6) + " (n=" + std::to_string(b1.size()) + "), median beta2 " +
                fmt(m2, 6) + " (n=" + std::to_string(b2.size()) + "); pilot (seed " +
                fmt(kPilotSeed) + ") bands beta1 [" + fmt(kBandBeta1Lo, 6) + ", " +
                fmt(kBandBeta1Hi, 6) + "], beta2 [" + fmt(kBandBeta2Lo, 6) + ", " +
                fmt(kBandBeta2Hi, 6) + "]" + (bands_hold_truth ? "" : " exclude the true (1.00, 0.75)") +
                "; " + fmt(secs, 3) + " s"};
}

Verdict criterion3(Context&) {
    sim::ModelSpec m;
    m.vol = sim::ConstantVolatility{0.0};
    m.components = {{{1.5, 1.0}}, {{1.0, 1.0}}};
    const sim::SamplingScheme scheme{1.0, 1e-5};
    est::PrelimConfig pc;  // j = 2, u_n = Delta^(2/11)
    std::vector<double> db, dg;
    std::size_t failed = 0;
    for (std::uint64_t r = 0; r < 200; ++r) {
        const auto s = sim::simulate_path(m, scheme, sim::ExactIncrements{}, derive_seed(0xb1a5, r));
        const auto e = est::preliminary_estimate(s, scheme, pc);
        if (!e.entries[0].usable()) {
            ++failed;
            continue;
        }
        db.push_back(e.entries[0].beta - 1.5);
        dg.push_back(e.entries[0].gamma - 1.0);
    }
    if (db.size() < 2) return {false, "too few usable replicates"};
    const double mb = stats::mean(db), sb = stats::standard_error(db);
    const double mg = stats::mean(dg), sg = stats::standard_error(dg);
    return {mb < -3 * sb && mg > 3 * sg,
            "mean(beta~1 - beta1) " + fmt(mb) + " (se " + fmt(sb, 2) + "), mean(Gamma~1 - A1) " +
                fmt(mg) + " (se " + fmt(sg, 2) + "), " + std::to_string(db.size()) + " usable, " +
                std::to_string(failed) + " failed"};
}

Verdict criterion4(Context& ctx) {
    const auto [pre, fin] = paired(ctx.desk_table(), 1);
    if (pre.size() < 2) {
        return {false, "not evaluable: " + std::to_string(pre.size()) + " replicates with both estimates"};
    }
    const double rf = stats::rmse(fin, 0.75), rp = stats::rmse(pre, 0.75);
    return {rf <= rp, "RMSE(beta-bar2) " + fmt(rf) + " vs RMSE(beta~2) " + fmt(rp) + " over " +
                          std::to_string(pre.size()) + " paired replicates"};
}

Verdict criterion5(Context& ctx) {
    const auto& base = ctx.desk_table();
    std::vector<std::pair<double, double>> out;  // beta2, rmse
    for (double b2 : {0.9, 0.75, 0.6}) {
        std::vector<double> v;
        if (b2 == 0.75) {
            v = base.column("final_beta2");
        } else {
            auto cfg = ctx.desk_config;
            cfg.components[1].beta = b2;
            cfg.model.components[1].law = {
                b2, harness::resolve_intensity(cfg.components[1], cfg.model.vol, cfg.scheme.delta,
                                               cfg.calibration_multiplier)};
            v = harness::run_monte_carlo(cfg, ctx.jobs).column("final_beta2");
        }
        if (v.empty()) return {false, "no usable estimates at beta2 = " + fmt(b2)};
        out.emplace_back(b2, stats::rmse(v, b2));
    }
    const bool inc = out[0].second < out[1].second && out[1].second < out[2].second;
    std::string d = "RMSE(beta-bar2):";
    for (auto [b, r] : out) d += " " + fmt(b, 2) + " -> " + fmt(r);
    return {inc, d};
}

Verdict criterion6(Context&) {
    const double beta = 1.5;
    sim::ModelSpec m;
    m.vol = sim::ConstantVolatility{0.0};
    m.components = {{{beta, 1.0}}};
    std::vector<double> level, stat, medians, centered_var;
    const std::vector<double> deltas = {1e-3, 1e-4, 1e-5};
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const sim::SamplingScheme scheme{1.0, deltas[k]};
        const double u = std::pow(deltas[k], 2.0 / 11.0);
        const double scale = std::pow(u, beta / 2);
        std::vector<double> here, centered;
        for (std::uint64_t r = 0; r < 50; ++r) {
            const auto s = sim::simulate_path(m, scheme, sim::JumpResolved{u / 100},
                                              derive_seed(0xd1, 100 * k + r));
            const double U = double(counts::count_increments(s.increments, u));
            const double V = double(counts::count_true_jumps(s, u));
            here.push_back(scale * std::abs(U - V));
            centered.push_back(scale * (V - sim::integrated_tail(m, u, 1.0)));
            level.push_back(double(k));
            stat.push_back(here.back());
        }
        medians.push_back(stats::median(here));
        centered_var.push_back(stats::variance(centered));
    }
    const auto sp = stats::spearman_increasing(level, stat);
    const double centered_ratio = *std::max_element(centered_var.begin(), centered_var.end()) /
                            *std::min_element(centered_var.begin(), centered_var.end());
    return {sp.p_value > 0.05,
            "medians " + fmt(medians[0]) + ", " + fmt(medians[1]) + ", " + fmt(medians[2]) +
                "; Spearman rho " + fmt(sp.statistic, 3) + ", p " + fmt(sp.p_value, 3) +
                "; var u^(b/2)(V - A) max/min " + fmt(centered_ratio, 3)};
}

Verdict criterion7(Context& ctx) {
    const fisher::ParametricModel m;  // c 0.1, beta (1, 0.75), a (0.5, 0.2)
    const std::vector<double> deltas = {1e-2, 1e-3, 1e-4, 1e-5};
    const auto t0 = std::chrono::steady_clock::now();
    const auto ladder = fisher::fisher_ladder(m, deltas, ctx.jobs);
    const double secs = seconds_since(t0);
    bool ok = secs < 300.0;
    std::string d;
    for (auto p : {fisher::Parameter::Beta1, fisher::Parameter::Beta2}) {
        std::vector<double> v;
        for (const auto& r : ladder) v.push_back(r.get(p).value);
        const auto th = fisher::theoretical_exponents(m, p);
        const auto fit = fisher::fit_exponent(deltas, v, th.log);
        const auto joint = fisher::fit_exponent_joint(deltas, v);
        ok = ok && std::abs(fit.exponent - th.delta) <= 0.05;
        d += std::string(fisher::to_string(p)) + " slope " + fmt(fit.exponent, 3) + " (theory " +
             fmt(th.delta, 3) + ", joint fit " + fmt(joint.exponent, 3) + "); ";
    }
    return {ok, d + fmt(secs, 3) + " s"};
}

Verdict criterion8(Context&) {
    bool ok = true;
    std::string d;
    std::ostringstream out, err;
    const int code = cli::run({"rates", "--beta1", "1", "--beta2", "3/4"}, out, err);
    const auto text = out.str();
    const bool cli_ok = code == 0 && text.find("0.125") != std::string::npos &&
                        text.find("1/8") != std::string::npos;
    ok = ok && cli_ok;
    d += std::string("rates output ") + (cli_ok ? "lists 0.125 = 1/8" : "lacks 0.125") + "; ";

    const auto exact = rates::optimal_rates_exact(Rational(1), Rational(3, 4));
    ok = ok && exact.beta2.delta == Rational(1, 8);

    // branch point: root of 3 b^2 + b - 8, bracketed by exact rationals
    const double bp = rates::branch_point();
    const Rational lo(1474, 1000), hi(1475, 1000);
    auto quad = [](const Rational& b) { return Rational(3) * b * b + b - Rational(8); };
    const bool bracket = quad(lo) < Rational(0) && Rational(0) < quad(hi) &&
                         rates::rate_comparison_exact(lo, Rational(1)).branch == rates::Branch::Low &&
                         rates::rate_comparison_exact(hi, Rational(1)).branch == rates::Branch::High;
    const bool bp_ok = std::abs(bp - (std::sqrt(97.0) - 1.0) / 6.0) < 1e-15 && bracket;
    ok = ok && bp_ok;
    d += "branch point " + fmt(bp, 16) + (bp_ok ? "" : " (mismatch)") + "; ";

    const auto lim = rates::ratio_limit_at_two();
    const auto near = rates::rate_comparison_exact(Rational(1999999, 1000000), Rational(1));
    const bool lim_ok = lim == Rational(4, 11) &&
                        std::abs(near.ratio.to_double() - 4.0 / 11.0) < 1e-6;
    ok = ok && lim_ok;
    d += "ratio limit " + lim.str();
    return {ok, d};
}

Verdict criterion9(Context& ctx) {
    if (ctx.suites.empty()) return {false, "no invariant suites given"};
    std::size_t failed = 0;
    std::string names;
    for (const auto& s : ctx.suites) {
        const std::string cmd = "\"" + s + "\" --gtest_brief=1 > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            ++failed;
            names += " " + s.substr(s.find_last_of('/') + 1);
        }
    }
    return {failed == 0, std::to_string(ctx.suites.size() - failed) + "/" +
                             std::to_string(ctx.suites.size()) + " suites pass" +
                             (failed ? ", failing:" + names : "")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    Context ctx;
    ctx.config_dir = BGIDX_CONFIG_DIR;
    ctx.jobs = harness::default_jobs();
    std::vector<int> only;
    std::string report;
    app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
    app.add_option("--config-dir", ctx.config_dir, "directory with desk_scale.json");
    app.add_option("--jobs", ctx.jobs, "worker threads");
    app.add_option("--report", report, "also write the verdict lines to this file");
    app.add_option("suites", ctx.suites, "unit test binaries for criterion 9");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Verdict(Context&)>>> all = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
    const std::vector<const char*> titles = {
        "", "exact-fit recovery", "desk-scale medians in pilot bands", "preliminary bias signs",
        "contrast beats preliminary", "boundary degradation", "exceedance discrepancy trend",
        "Fisher exponents", "rate tables", "invariant suites"};

    std::ostringstream lines;
    int unexpected = 0;
    for (const auto& [id, fn] : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Verdict v;
        try {
            v = fn(ctx);
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
            ++unexpected;
        }
        const bool known = kKnownFailures.count(id) > 0;
        if (!v.pass && !known) ++unexpected;
        std::ostringstream line;
        line << "criterion " << id << " [" << titles[id] << "]: " << (v.pass ? "PASS" : "FAIL")
             << (!v.pass && known ? " (known failure)" : "") << " - " << v.detail;
        std::cout << line.str() << std::endl;
        lines << line.str() << '\n';
    }
    if (!report.empty()) std::ofstream(report) << lines.str();
    return unexpected == 0 ? 0 : 1;
}
