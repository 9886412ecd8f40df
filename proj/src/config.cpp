#include "bgidx/errors.hpp"
#include "bgidx/harness.hpp"
#include "bgidx/stable.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bgidx::harness {

namespace {

using nlohmann::json;

// Typed access to one JSON object with the dotted path kept for diagnostics.
class Node {
public:
    Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {
        if (!v_.is_object()) {
            fail("expected an object");
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("field '" + (path_.empty() ? std::string("<root>") : path_) +
                          "': " + what);
    }

    [[nodiscard]] std::string child(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    [[nodiscard]] bool has(std::string_view key) const { return v_.contains(std::string(key)); }

    void allow(std::initializer_list<std::string_view> keys) const {
        const std::set<std::string_view> ok(keys);
        for (const auto& item : v_.items()) {
            if (!ok.count(item.key())) {
                throw ConfigError("field '" + child(item.key()) + "': unknown key");
            }
        }
    }

    [[nodiscard]] const json& raw(std::string_view key) const { return v_.at(std::string(key)); }

    [[nodiscard]] Node object(std::string_view key) const {
        if (!has(key)) {
            throw ConfigError("field '" + child(key) + "': missing");
        }
        return {raw(key), child(key)};
    }

    [[nodiscard]] double number(std::string_view key) const {
        if (!has(key)) {
            throw ConfigError("field '" + child(key) + "': missing");
        }
        const auto& x = raw(key);
        if (!x.is_number()) {
            throw ConfigError("field '" + child(key) + "': expected a number");
        }
        return x.get<double>();
    }

    [[nodiscard]] double number(std::string_view key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    [[nodiscard]] std::optional<double> maybe_number(std::string_view key) const {
        if (!has(key)) {
            return std::nullopt;
        }
        return number(key);
    }

    [[nodiscard]] std::uint64_t count(std::string_view key, std::uint64_t fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const auto& x = raw(key);
        if (!x.is_number_integer() || (x.is_number_integer() && x.get<std::int64_t>() < 0 &&
                                       !x.is_number_unsigned())) {
            throw ConfigError("field '" + child(key) + "': expected a nonnegative integer");
        }
        return x.get<std::uint64_t>();
    }

    [[nodiscard]] bool flag(std::string_view key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        if (!raw(key).is_boolean()) {
            throw ConfigError("field '" + child(key) + "': expected true or false");
        }
        return raw(key).get<bool>();
    }

    [[nodiscard]] std::string text(std::string_view key, std::string fallback) const {
        if (!has(key)) {
            return fallback;
        }
        if (!raw(key).is_string()) {
            throw ConfigError("field '" + child(key) + "': expected a string");
        }
        return raw(key).get<std::string>();
    }

    [[nodiscard]] std::vector<double> numbers(std::string_view key) const {
        const auto& x = raw(key);
        if (!x.is_array()) {
            throw ConfigError("field '" + child(key) + "': expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!x[i].is_number()) {
                throw ConfigError("field '" + child(key) + "[" + std::to_string(i) +
                                  "]': expected a number");
            }
            out.push_back(x[i].get<double>());
        }
        return out;
    }

private:
    const json& v_;
    std::string path_;
};

sim::VolatilitySpec parse_vol(const Node& n) {
    const std::string type = n.text("type", "constant");
    if (type == "constant") {
        n.allow({"type", "sigma"});
        return sim::ConstantVolatility{n.number("sigma", 0.0)};
    }
    if (type == "heston_jump") {
        n.allow({"type", "kappa", "eta", "gamma_vol", "rho_corr", "v0", "jump_intensity",
                 "jump_half_width"});
        sim::HestonJumpVolatility h;
        h.kappa = n.number("kappa", h.kappa);
        h.eta = n.number("eta", h.eta);
        h.gamma_vol = n.number("gamma_vol", h.gamma_vol);
        h.rho_corr = n.number("rho_corr", h.rho_corr);
        h.v0 = n.number("v0", h.eta);
        h.jump_intensity = n.number("jump_intensity", h.jump_intensity);
        h.jump_half_width = n.number("jump_half_width", h.jump_half_width);
        return h;
    }
    n.fail("type must be 'constant' or 'heston_jump'");
}

est::ThresholdRule parse_threshold(const Node& n) {
    const std::string rule = n.text("rule", "theory");
    if (rule == "theory") {
        n.allow({"rule", "K"});
        return est::TheoryThreshold{n.number("K", 1.0)};
    }
    if (rule == "practical") {
        n.allow({"rule", "alpha", "eta"});
        return est::PracticalThreshold{n.number("alpha", 7.0), n.maybe_number("eta")};
    }
    if (rule == "explicit") {
        n.allow({"rule", "u"});
        return est::ExplicitThreshold{n.number("u")};
    }
    n.fail("rule must be 'theory', 'practical' or 'explicit'");
}

counts::Side parse_side(const Node& n, std::string_view key) {
    const std::string s = n.text(key, "absolute");
    if (s == "absolute") return counts::Side::Absolute;
    if (s == "positive") return counts::Side::Positive;
    if (s == "negative") return counts::Side::Negative;
    throw ConfigError("field '" + n.child(key) + "': expected absolute, positive or negative");
}

std::string line_diagnostic(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <class F>
auto guarded(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("field '" + field + "': " + e.what());
    }
}

}  // namespace

double resolve_intensity(const ComponentConfig& c, const sim::VolatilitySpec& vol, double delta,
                         double multiplier) {
    if (c.tail_intensity) {
        return *c.tail_intensity;
    }
    if (!c.tail_probability) {
        throw ConfigError("component needs tail_intensity or tail_probability");
    }
    const double eta = sim::long_run_variance(vol);
    if (!(eta > 0.0)) {
        throw ConfigError("calibration by tail_probability needs a positive continuous variance");
    }
    const double threshold = multiplier * std::sqrt(eta * delta);
    return stable::calibrate_intensity(c.beta, delta, threshold, *c.tail_probability);
}

void ExperimentConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
    }
    if (replicates < 1) {
        throw ConfigError("replicates must be at least 1");
    }
    if (substeps < 1) {
        throw ConfigError("substeps must be at least 1");
    }
    try {
        model.validate();
        scheme.validate();
        prelim.validate();
        contrast.validate(prelim.j);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> ExperimentConfig::true_betas() const {
    std::vector<double> out;
    for (const auto& c : model.components) {
        out.push_back(c.law.beta);
    }
    return out;
}

std::vector<double> ExperimentConfig::true_intensities() const {
    std::vector<double> out;
    const double T = static_cast<double>(scheme.n()) * scheme.delta;
    for (const auto& c : model.components) {
        out.push_back(T * c.law.tail_intensity);
    }
    return out;
}

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON at " + line_diagnostic(text, e.byte == 0 ? 0 : e.byte - 1) +
                          ": " + e.what());
    }
    const Node root(doc, "");
    root.allow({"schema_version", "name", "model", "sampling", "simulation", "preliminary",
                "contrast", "use_stop_rule", "replicates", "seed", "output"});
    ExperimentConfig cfg;
    if (!root.has("schema_version")) {
        root.fail("missing schema_version");
    }
    cfg.schema_version = static_cast<int>(root.count("schema_version", 0));
    if (cfg.schema_version != kSchemaVersion) {
        throw ConfigError("field 'schema_version': unsupported version " +
                          std::to_string(cfg.schema_version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    }
    cfg.name = root.text("name", "");

    // sampling first: calibration needs delta
    const Node sampling = root.object("sampling");
    sampling.allow({"delta", "delta_seconds", "time_unit", "n", "horizon"});
    if (sampling.has("delta") == sampling.has("delta_seconds")) {
        sampling.fail("give exactly one of delta (model time units) or delta_seconds");
    }
    // seconds of trading time per model time unit
    const std::string unit = sampling.text("time_unit", "day");
    double unit_seconds = sim::kSecondsPerDay;
    if (unit == "year") {
        unit_seconds *= sim::kTradingDaysPerYear;
    } else if (unit != "day") {
        throw ConfigError("field 'sampling.time_unit': expected 'year' or 'day'");
    }
    const double delta = sampling.has("delta")
                             ? sampling.number("delta")
                             : sampling.number("delta_seconds") / unit_seconds;
    if (!(delta > 0.0)) {
        throw ConfigError("field 'sampling.delta': must be positive");
    }
    if (sampling.has("n") == sampling.has("horizon")) {
        sampling.fail("give exactly one of n or horizon");
    }
    if (sampling.has("n")) {
        const auto n = sampling.count("n", 0);
        if (n < 1) {
            throw ConfigError("field 'sampling.n': must be at least 1");
        }
        cfg.scheme = sim::SamplingScheme::with_count(n, delta);
    } else {
        cfg.scheme = sim::SamplingScheme{sampling.number("horizon"), delta};
    }

    const Node model = root.object("model");
    model.allow({"drift", "x0", "volatility", "components", "calibration_multiplier"});
    cfg.model.drift = model.number("drift", 0.0);
    cfg.model.x0 = model.number("x0", 0.0);
    if (model.has("volatility")) {
        cfg.model.vol = parse_vol(model.object("volatility"));
    }
    cfg.calibration_multiplier = model.number("calibration_multiplier", 4.0);
    if (model.has("components")) {
        const auto& arr = model.raw("components");
        if (!arr.is_array()) {
            throw ConfigError("field 'model.components': expected an array");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = "model.components[" + std::to_string(i) + "]";
            const Node c(arr[i], path);
            c.allow({"beta", "tail_intensity", "tail_probability"});
            ComponentConfig cc;
            cc.beta = c.number("beta");
            if (!(cc.beta > 0.0 && cc.beta < 2.0)) {
                throw ConfigError("field '" + path + ".beta': must lie in (0, 2)");
            }
            cc.tail_intensity = c.maybe_number("tail_intensity");
            cc.tail_probability = c.maybe_number("tail_probability");
            if (cc.tail_intensity.has_value() == cc.tail_probability.has_value()) {
                c.fail("give exactly one of tail_intensity or tail_probability");
            }
            const double a = guarded(path, [&] {
                return resolve_intensity(cc, cfg.model.vol, delta, cfg.calibration_multiplier);
            });
            cfg.components.push_back(cc);
            cfg.model.components.push_back({stable::StableLaw{cc.beta, a}});
        }
    }

    if (root.has("simulation")) {
        const Node s = root.object("simulation");
        s.allow({"mode", "floor", "substeps"});
        const std::string mode = s.text("mode", "exact");
        if (mode == "exact") {
            cfg.mode = sim::ExactIncrements{};
        } else if (mode == "jump_resolved") {
            cfg.mode = sim::JumpResolved{s.number("floor", 1e-4)};
        } else {
            throw ConfigError("field 'simulation.mode': expected 'exact' or 'jump_resolved'");
        }
        cfg.substeps = s.count("substeps", 1);
    }

    if (root.has("preliminary")) {
        const Node p = root.object("preliminary");
        p.allow({"j", "gamma", "epsilon", "rho", "threshold", "side", "allow_large_rho"});
        cfg.prelim.j = p.count("j", cfg.prelim.j);
        cfg.prelim.gamma = p.number("gamma", cfg.prelim.gamma);
        cfg.prelim.epsilon = p.number("epsilon", cfg.prelim.epsilon);
        cfg.prelim.rho = p.number("rho", cfg.prelim.rho);
        cfg.prelim.allow_large_rho = p.flag("allow_large_rho", false);
        if (p.has("threshold")) {
            cfg.prelim.threshold = parse_threshold(p.object("threshold"));
        }
        cfg.prelim.side = parse_side(p, "side");
    }

    if (root.has("contrast")) {
        const Node c = root.object("contrast");
        c.allow({"v_grid", "weights", "tolerance", "max_iterations", "multistarts", "box"});
        if (c.has("v_grid")) {
            cfg.contrast.v_grid = c.numbers("v_grid");
        }
        if (c.has("weights")) {
            const auto& w = c.raw("weights");
            if (w.is_string()) {
                const auto s = w.get<std::string>();
                if (s == "uniform") {
                    cfg.contrast.weights.clear();
                } else if (s == "decreasing") {
                    cfg.contrast.weights = est::decreasing_weights(cfg.contrast.v_grid);
                } else {
                    throw ConfigError("field 'contrast.weights': expected 'uniform', "
                                      "'decreasing' or an array");
                }
            } else {
                cfg.contrast.weights = c.numbers("weights");
            }
        }
        cfg.contrast.tolerance = c.number("tolerance", cfg.contrast.tolerance);
        cfg.contrast.max_iterations = c.count("max_iterations", cfg.contrast.max_iterations);
        cfg.contrast.multistarts = c.count("multistarts", cfg.contrast.multistarts);
        if (c.has("box")) {
            const Node b = c.object("box");
            b.allow({"beta", "gamma"});
            est::BoxHalfWidths box;
            box.beta = b.number("beta", box.beta);
            box.gamma = b.number("gamma", box.gamma);
            cfg.contrast.box = box;
        }
    }

    cfg.use_stop_rule = root.flag("use_stop_rule", false);
    cfg.replicates = root.count("replicates", 1);
    cfg.seed = root.count("seed", 1);
    if (root.has("output")) {
        cfg.output = root.text("output", "");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace bgidx::harness
