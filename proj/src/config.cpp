#include "lthru/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lthru/errors.hpp"

namespace lthru {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxSweepPoints = 100000;

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    return j;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(path + "." + it.key(), "unknown field");
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
    return v;
}

double power(const json& j, const std::string& path) {
    if (j.is_string()) {
        try {
            return parse_power(j.get<std::string>());
        } catch (const DomainError& e) {
            throw ConfigError(path, e.what());
        }
    }
    return number(j, path);
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

void parse_scenario(const json& j, Scenario& s) {
    require_object(j, "scenario");
    reject_unknown(j, "scenario", {"lambda", "b", "p0", "p1", "r0", "p_star", "theta_star", "noise"});
    if (j.contains("lambda")) s.lambda = number(j["lambda"], "scenario.lambda");
    if (j.contains("b")) s.b = number(j["b"], "scenario.b");
    if (j.contains("p0")) s.p0 = power(j["p0"], "scenario.p0");
    if (j.contains("p1")) s.p1 = power(j["p1"], "scenario.p1");
    if (j.contains("r0")) s.r0 = number(j["r0"], "scenario.r0");
    if (j.contains("p_star")) s.p_star = power(j["p_star"], "scenario.p_star");
    if (j.contains("theta_star")) s.theta_star = power(j["theta_star"], "scenario.theta_star");
    if (j.contains("noise")) s.noise = power(j["noise"], "scenario.noise");
}

bool has_sigma(const std::string& model) {
    return model == "log_normal_shadowing" || model == "shadowing_and_nakagami";
}
bool has_m(const std::string& model) { return model == "nakagami" || model == "shadowing_and_nakagami"; }

void parse_propagation(const json& j, PropagationSpec& p) {
    require_object(j, "propagation");
    reject_unknown(j, "propagation", {"model", "sigma", "sigma_db", "m"});
    if (!j.contains("model")) throw ConfigError("propagation.model", "missing");
    p.model = text(j["model"], "propagation.model");
    static const std::set<std::string> models{"path_loss_only", "log_normal_shadowing", "nakagami", "rayleigh",
                                              "shadowing_and_nakagami"};
    if (!models.count(p.model)) throw ConfigError("propagation.model", "unknown model '" + p.model + "'");
    const bool sig = j.contains("sigma");
    const bool sig_db = j.contains("sigma_db");
    if (sig && sig_db) throw ConfigError("propagation", "give exactly one of sigma and sigma_db");
    if ((sig || sig_db) && !has_sigma(p.model))
        throw ConfigError(sig ? "propagation.sigma" : "propagation.sigma_db", "not used by model " + p.model);
    if (has_sigma(p.model) && !sig && !sig_db)
        throw ConfigError("propagation", "model " + p.model + " needs sigma or sigma_db");
    if (sig) p.sigma = number(j["sigma"], "propagation.sigma");
    if (sig_db) {
        try {
            p.sigma = sigma_from_db(number(j["sigma_db"], "propagation.sigma_db"));
        } catch (const DomainError& e) {
            throw ConfigError("propagation.sigma_db", e.what());
        }
    }
    if (j.contains("m")) {
        if (!has_m(p.model)) throw ConfigError("propagation.m", "not used by model " + p.model);
        p.m = number(j["m"], "propagation.m");
    } else if (has_m(p.model)) {
        throw ConfigError("propagation.m", "missing for model " + p.model);
    }
}

void parse_traffic(const json& j, TrafficSpec& t) {
    require_object(j, "traffic");
    reject_unknown(j, "traffic", {"pattern", "q", "lambda_p", "packet_len"});
    if (!j.contains("pattern")) throw ConfigError("traffic.pattern", "missing");
    t.pattern = text(j["pattern"], "traffic.pattern");
    if (t.pattern == "slotted_sync" || t.pattern == "slotted_async") {
        for (const char* f : {"lambda_p", "packet_len"})
            if (j.contains(f)) throw ConfigError(std::string("traffic.") + f, "not used by pattern " + t.pattern);
        if (!j.contains("q")) throw ConfigError("traffic.q", "missing for pattern " + t.pattern);
        t.q = number(j["q"], "traffic.q");
    } else if (t.pattern == "exponential") {
        if (j.contains("q")) throw ConfigError("traffic.q", "not used by pattern exponential");
        if (!j.contains("lambda_p")) throw ConfigError("traffic.lambda_p", "missing for pattern exponential");
        t.lambda_p = number(j["lambda_p"], "traffic.lambda_p");
        if (j.contains("packet_len")) t.packet_len = number(j["packet_len"], "traffic.packet_len");
    } else {
        throw ConfigError("traffic.pattern", "unknown pattern '" + t.pattern + "'");
    }
}

AnalysisKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "connectivity") return AnalysisKind::connectivity;
    if (s == "sinr") return AnalysisKind::sinr;
    if (s == "both") return AnalysisKind::both;
    throw ConfigError(path, "expected connectivity, sinr or both");
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

void parse_analysis(const json& j, AnalysisSpec& a) {
    if (j.is_string()) {
        a.kind = parse_kind(j.get<std::string>(), "analysis");
        return;
    }
    require_object(j, "analysis");
    reject_unknown(j, "analysis", {"type", "strategy", "gh_order", "outer_gh_order", "duty_cycle", "mu_a_normalized"});
    if (j.contains("type")) a.kind = parse_kind(text(j["type"], "analysis.type"), "analysis.type");
    if (j.contains("strategy")) {
        try {
            a.strategy = parse_strategy(text(j["strategy"], "analysis.strategy"));
        } catch (const DomainError& e) {
            throw ConfigError("analysis.strategy", e.what());
        }
    }
    if (j.contains("gh_order")) {
        a.gh_order = integer(j["gh_order"], "analysis.gh_order");
        if (a.gh_order < 1 || a.gh_order > 64) throw ConfigError("analysis.gh_order", "must lie in [1, 64]");
    }
    if (j.contains("outer_gh_order")) {
        a.outer_gh_order = integer(j["outer_gh_order"], "analysis.outer_gh_order");
        if (a.outer_gh_order < 0 || a.outer_gh_order > 64)
            throw ConfigError("analysis.outer_gh_order", "must lie in [0, 64] (0 selects adaptive integration)");
    }
    if (j.contains("duty_cycle")) {
        const auto d = text(j["duty_cycle"], "analysis.duty_cycle");
        if (d == "exact")
            a.duty_mode = DutyCycleMode::exact;
        else if (d == "approximate")
            a.duty_mode = DutyCycleMode::approximate;
        else
            throw ConfigError("analysis.duty_cycle", "expected exact or approximate");
    }
    if (j.contains("mu_a_normalized")) {
        if (!j["mu_a_normalized"].is_boolean()) throw ConfigError("analysis.mu_a_normalized", "expected a boolean");
        a.mu_a_normalized = j["mu_a_normalized"].get<bool>();
    }
}

void check_sweep_target(const std::string& param, const RunConfig& c) {
    const auto& names = sweep_parameters();
    if (std::find(names.begin(), names.end(), param) == names.end())
        throw ConfigError("sweep.parameter", "'" + param + "' is not a sweepable field");
    if ((param == "sigma" || param == "sigma_db") && !has_sigma(c.propagation.model))
        throw ConfigError("sweep.parameter", param + " is not a field of model " + c.propagation.model);
    if (param == "m" && !has_m(c.propagation.model))
        throw ConfigError("sweep.parameter", "m is not a field of model " + c.propagation.model);
    const bool slotted = c.traffic.pattern != "exponential";
    if (param == "q" && !slotted) throw ConfigError("sweep.parameter", "q is not a field of pattern exponential");
    if ((param == "lambda_p" || param == "packet_len") && slotted)
        throw ConfigError("sweep.parameter", param + " is not a field of pattern " + c.traffic.pattern);
}

void parse_sweep(const json& j, RunConfig& c) {
    require_object(j, "sweep");
    reject_unknown(j, "sweep", {"parameter", "start", "stop", "step", "values"});
    if (!j.contains("parameter")) throw ConfigError("sweep.parameter", "missing");
    SweepSpec s;
    s.parameter = text(j["parameter"], "sweep.parameter");
    check_sweep_target(s.parameter, c);
    const bool range = j.contains("start") || j.contains("stop") || j.contains("step");
    if (j.contains("values")) {
        if (range) throw ConfigError("sweep", "give either values or start/stop/step, not both");
        if (!j["values"].is_array() || j["values"].empty())
            throw ConfigError("sweep.values", "expected a nonempty array");
        for (std::size_t i = 0; i < j["values"].size(); ++i)
            s.values.push_back(number(j["values"][i], "sweep.values[" + std::to_string(i) + "]"));
    } else {
        for (const char* f : {"start", "stop", "step"})
            if (!j.contains(f)) throw ConfigError(std::string("sweep.") + f, "missing");
        const double start = number(j["start"], "sweep.start");
        const double stop = number(j["stop"], "sweep.stop");
        const double step = number(j["step"], "sweep.step");
        if (!(step > 0.0)) throw ConfigError("sweep.step", "must be positive");
        if (!(start <= stop)) throw ConfigError("sweep.start", "must not exceed sweep.stop");
        if ((stop - start) / step + 1.0 > static_cast<double>(kMaxSweepPoints))
            throw ConfigError("sweep.step", "grid exceeds " + std::to_string(kMaxSweepPoints) + " points");
        s.values = decimal_range(start, stop, step);
    }
    c.sweep = std::move(s);
}

void parse_sim(const json& j, RunConfig& c) {
    require_object(j, "sim");
    reject_unknown(j, "sim", {"trials", "r_max", "seed", "target_stderr", "far_field_correction", "max_doublings"});
    SimConfig s;
    if (j.contains("trials")) {
        if (!j["trials"].is_number_integer() || j["trials"].get<std::int64_t>() < 1)
            throw ConfigError("sim.trials", "expected a positive integer");
        s.trials = j["trials"].get<std::uint64_t>();
    }
    if (j.contains("r_max")) {
        const auto& r = j["r_max"];
        if (r.is_string()) {
            if (r.get<std::string>() != "auto") throw ConfigError("sim.r_max", "expected a number or \"auto\"");
        } else {
            s.r_max = number(r, "sim.r_max");
            if (!(*s.r_max > c.scenario.r0)) throw ConfigError("sim.r_max", "must exceed scenario.r0");
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("sim.seed", "expected an unsigned 64-bit integer");
        s.master_seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("target_stderr")) {
        s.target_stderr = number(j["target_stderr"], "sim.target_stderr");
        if (!(*s.target_stderr > 0.0)) throw ConfigError("sim.target_stderr", "must be positive");
    }
    if (j.contains("far_field_correction")) {
        if (!j["far_field_correction"].is_boolean())
            throw ConfigError("sim.far_field_correction", "expected a boolean");
        s.far_field_correction = j["far_field_correction"].get<bool>();
    }
    if (j.contains("max_doublings")) {
        s.max_doublings = integer(j["max_doublings"], "sim.max_doublings");
        if (s.max_doublings < 0) throw ConfigError("sim.max_doublings", "must be >= 0");
    }
    c.sim = s;
}

// Smallest number of decimals (up to 12) that represents x exactly enough.
int decimals_of(double x) {
    for (int d = 0; d <= 12; ++d) {
        const double scaled = x * std::pow(10.0, d);
        if (std::abs(scaled - std::round(scaled)) <= 1e-9 * std::max(1.0, std::abs(scaled))) return d;
    }
    return 12;
}

}  // namespace

PropagationModel PropagationSpec::build() const {
    if (model == "path_loss_only") return PropagationModel::path_loss_only();
    if (model == "log_normal_shadowing") return PropagationModel::log_normal_shadowing(sigma);
    if (model == "nakagami") return PropagationModel::nakagami(m);
    if (model == "rayleigh") return PropagationModel::rayleigh();
    if (model == "shadowing_and_nakagami") return PropagationModel::shadowing_and_nakagami(sigma, m);
    throw ConfigError("propagation.model", "unknown model '" + model + "'");
}

TrafficModel TrafficSpec::build() const {
    if (pattern == "slotted_sync") return TrafficModel::slotted_sync(q);
    if (pattern == "slotted_async") return TrafficModel::slotted_async(q);
    if (pattern == "exponential") return TrafficModel::exponential(lambda_p, packet_len);
    throw ConfigError("traffic.pattern", "unknown pattern '" + pattern + "'");
}

double parse_power(const std::string& s) {
    std::string body = s;
    bool db = false;
    if (body.size() > 2 && (body.compare(body.size() - 2, 2, "dB") == 0)) {
        db = true;
        body.resize(body.size() - 2);
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(body, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != body.size() || !std::isfinite(v))
        throw DomainError("cannot read '" + s + "' as a power (expected a number or a value like \"10dB\")");
    return db ? std::pow(10.0, v / 10.0) : v;
}

std::vector<double> decimal_range(double start, double stop, double step) {
    if (!(step > 0.0)) throw DomainError("decimal_range: step must be positive");
    if (!(start <= stop)) throw DomainError("decimal_range: start must not exceed stop");
    const int d = std::max(decimals_of(start), decimals_of(step));
    const double scale = std::pow(10.0, d);
    const auto a = static_cast<std::int64_t>(std::llround(start * scale));
    const auto s = static_cast<std::int64_t>(std::llround(step * scale));
    const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out.push_back(static_cast<double>(a + i * s) / scale);
    return out;
}

const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names{"lambda", "b",     "p0",       "p1", "power",    "r0",
                                                "p_star", "theta_star", "noise", "sigma", "sigma_db", "m",
                                                "q",      "lambda_p",   "packet_len"};
    return names;
}

RunConfig apply_sweep_value(const RunConfig& config, const std::string& p, double v) {
    RunConfig c = config;
    auto& s = c.scenario;
    if (p == "lambda") s.lambda = v;
    else if (p == "b") s.b = v;
    else if (p == "p0") s.p0 = v;
    else if (p == "p1") s.p1 = v;
    else if (p == "power") s.p0 = s.p1 = v;
    else if (p == "r0") s.r0 = v;
    else if (p == "p_star") s.p_star = v;
    else if (p == "theta_star") s.theta_star = v;
    else if (p == "noise") s.noise = v;
    else if (p == "sigma") c.propagation.sigma = v;
    else if (p == "sigma_db") c.propagation.sigma = sigma_from_db(v);
    else if (p == "m") c.propagation.m = v;
    else if (p == "q") c.traffic.q = v;
    else if (p == "lambda_p") c.traffic.lambda_p = v;
    else if (p == "packet_len") c.traffic.packet_len = v;
    else throw ConfigError("sweep.parameter", "'" + p + "' is not a sweepable field");
    return c;
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<json>", e.what());
    }
    require_object(j, "<root>");
    reject_unknown(j, "<root>", {"scenario", "propagation", "traffic", "analysis", "sweep", "sim", "output"});
    RunConfig c;
    if (j.contains("scenario")) parse_scenario(j["scenario"], c.scenario);
    if (j.contains("propagation")) parse_propagation(j["propagation"], c.propagation);
    if (j.contains("traffic")) parse_traffic(j["traffic"], c.traffic);
    if (j.contains("analysis")) parse_analysis(j["analysis"], c.analysis);
    if (j.contains("sweep")) parse_sweep(j["sweep"], c);
    if (j.contains("sim")) parse_sim(j["sim"], c);
    if (j.contains("output")) c.output = text(j["output"], "output");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open configuration file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace lthru
