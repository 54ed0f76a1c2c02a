#include "lthru/runner.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lthru/errors.hpp"

namespace lthru {

namespace {

struct AnalyticRow {
    double p_t = 0.0;
    double p_s = 0.0;
    double p_x = 0.0;  // p_A or success probability
    double y = 0.0;    // mu_A (possibly normalized) or gamma
    double throughput = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

bool saturated_exponential(const RunConfig& c) {
    return c.traffic.pattern == "exponential" && std::isinf(c.traffic.lambda_p);
}

AnalyticRow analytic_row(const RunConfig& c, AnalysisKind kind, const AnalysisSpec& a) {
    const auto model = c.propagation.build();
    AnalyticRow row;
    if (kind == AnalysisKind::connectivity) {
        ConnectivityOptions o;
        o.gh_order = a.gh_order;
        o.adaptive_combined = a.strategy == Strategy::generic;
        if (saturated_exponential(c)) {
            // Always-busy queue: the receiver is never silent.
            row.p_t = 1.0;
            row.p_x = probe_audible_prob(c.scenario, model, o).value;
            row.y = a.mu_a_normalized ? channel_moment(model, c.scenario.b) : mean_audible_nodes(c.scenario, model);
            return row;
        }
        const auto b = connectivity_throughput(c.scenario, model, c.traffic.build(), o);
        row = {b.p_t, b.p_s, b.p_a, b.mu_a, b.throughput};
        if (a.mu_a_normalized) row.y = channel_moment(model, c.scenario.b);
        return row;
    }
    SinrOptions o;
    o.strategy = a.strategy;
    o.outer_gh_order = a.outer_gh_order;
    o.duty_mode = a.duty_mode;
    if (saturated_exponential(c)) {
        check_sinr_scenario(c.scenario);
        row.p_t = 1.0;
        row.y = std::numeric_limits<double>::infinity();
        return row;
    }
    const auto b = sinr_throughput(c.scenario, model, c.traffic.build(), o);
    return {b.p_t, b.p_s, b.success_prob, b.gamma, b.throughput};
}

SimEstimate simulate_point(const RunConfig& c, AnalysisKind kind, const SimConfig& sim) {
    if (saturated_exponential(c)) {
        SimEstimate e;
        e.seed = sim.master_seed;
        return e;
    }
    const auto model = c.propagation.build();
    const auto traffic = c.traffic.build();
    if (kind == AnalysisKind::connectivity) return simulate_connectivity_throughput(c.scenario, model, traffic, sim);
    return simulate_sinr_throughput(c.scenario, model, traffic, sim);
}

SimConfig point_sim(const SimConfig& base, std::size_t series, std::size_t index) {
    SimConfig s = base;
    s.master_seed = splitmix64(base.master_seed ^ splitmix64((static_cast<std::uint64_t>(series) << 32) + index));
    return s;
}

std::string column_name(const SweepPlan& plan, const char* conn, const char* sinr, const char* mixed) {
    bool any_conn = false;
    bool any_sinr = false;
    for (const auto& s : plan.series) (s.kind == AnalysisKind::connectivity ? any_conn : any_sinr) = true;
    if (any_conn && any_sinr) return mixed;
    return any_conn ? conn : sinr;
}

void check_plan(const SweepPlan& plan) {
    if (plan.series.empty()) throw DomainError("sweep plan has no series");
    if (plan.grid.empty()) throw DomainError("sweep plan has an empty grid");
}

RunConfig base_config() {
    RunConfig c;
    c.scenario = Scenario{};
    c.scenario.lambda = 1.0;
    c.scenario.b = 2.0;
    c.scenario.r0 = 1.0;
    c.scenario.p0 = 10.0;
    c.scenario.p1 = 10.0;
    c.scenario.p_star = 1.0;
    c.scenario.theta_star = 1.0;
    c.scenario.noise = 1.0;
    c.propagation.model = "rayleigh";
    c.traffic.pattern = "slotted_sync";
    c.traffic.q = 0.5;
    return c;
}

// The four propagation cases compared in the figures.
std::vector<std::pair<std::string, PropagationSpec>> propagation_cases(double sigma_db) {
    const double sigma = sigma_from_db(sigma_db);
    return {
        {"path_loss_only", {"path_loss_only", 0.0, 1.0}},
        {"log_normal_shadowing", {"log_normal_shadowing", sigma, 1.0}},
        {"rayleigh", {"rayleigh", 0.0, 1.0}},
        {"shadowing_and_rayleigh", {"shadowing_and_nakagami", sigma, 1.0}},
    };
}

// Traffic series over the transmission probability q. Exponential traffic is
// placed on the same axis through p_T = rho / (1 + rho), i.e. rho = q / (1 - q).
std::vector<Series> traffic_series(const RunConfig& base, AnalysisKind kind) {
    std::vector<Series> out;
    for (const char* pattern : {"slotted_sync", "slotted_async"}) {
        out.push_back({pattern, kind, [base, pattern](double q) {
                           RunConfig c = base;
                           c.traffic.pattern = pattern;
                           c.traffic.q = q;
                           return c;
                       }});
    }
    out.push_back({"exponential", kind, [base](double q) {
                       RunConfig c = base;
                       c.traffic.pattern = "exponential";
                       c.traffic.packet_len = 1.0;
                       c.traffic.lambda_p = q < 1.0 ? q / (1.0 - q) : std::numeric_limits<double>::infinity();
                       return c;
                   }});
    return out;
}

std::vector<Series> propagation_series(const RunConfig& base, AnalysisKind kind, const std::string& parameter,
                                       double sigma_db) {
    std::vector<Series> out;
    for (const auto& [name, spec] : propagation_cases(sigma_db)) {
        out.push_back({name, kind, [base, spec = spec, parameter](double v) {
                           RunConfig c = base;
                           c.propagation = spec;
                           return apply_sweep_value(c, parameter, v);
                       }});
    }
    return out;
}

}  // namespace

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

SweepPlan plan_from_config(const RunConfig& config) {
    SweepPlan plan;
    plan.analysis = config.analysis;
    plan.sim = config.sim;
    if (config.sweep) {
        plan.parameter = config.sweep->parameter;
        plan.grid = config.sweep->values;
    }
    const std::string param = plan.parameter;
    const bool swept = config.sweep.has_value();
    auto at = [config, param, swept](double v) { return swept ? apply_sweep_value(config, param, v) : config; };
    switch (config.analysis.kind) {
        case AnalysisKind::connectivity: plan.series.push_back({"connectivity", AnalysisKind::connectivity, at}); break;
        case AnalysisKind::sinr: plan.series.push_back({"sinr", AnalysisKind::sinr, at}); break;
        case AnalysisKind::both:
            plan.series.push_back({"connectivity", AnalysisKind::connectivity, at});
            plan.series.push_back({"sinr", AnalysisKind::sinr, at});
            plan.label_series = true;
            break;
    }
    return plan;
}

SweepPlan figure_plan(int figure) {
    SweepPlan plan;
    plan.label_series = true;
    RunConfig base = base_config();
    switch (figure) {
        case 4:
            plan.parameter = "b";
            plan.grid = decimal_range(1.0, 4.0, 0.1);
            plan.analysis.mu_a_normalized = true;
            plan.series = propagation_series(base, AnalysisKind::connectivity, "b", 10.0);
            break;
        case 6:
            plan.parameter = "q";
            plan.grid = decimal_range(0.0, 1.0, 0.05);
            plan.series = traffic_series(base, AnalysisKind::connectivity);
            break;
        case 7:
            plan.parameter = "power";
            plan.grid = decimal_range(0.1, 20.0, 0.1);
            plan.series = propagation_series(base, AnalysisKind::connectivity, "power", 10.0);
            break;
        case 8:
            plan.parameter = "q";
            plan.grid = decimal_range(0.0, 1.0, 0.05);
            plan.series = traffic_series(base, AnalysisKind::sinr);
            break;
        case 9:
            plan.parameter = "lambda";
            plan.grid = decimal_range(0.05, 2.0, 0.05);
            plan.series = propagation_series(base, AnalysisKind::sinr, "lambda", 10.0);
            break;
        case 10: {
            plan.parameter = "lambda";
            plan.grid = decimal_range(0.05, 2.0, 0.05);
            auto at = [base](double v) { return apply_sweep_value(base, "lambda", v); };
            plan.series.push_back({"connectivity", AnalysisKind::connectivity, at});
            plan.series.push_back({"sinr", AnalysisKind::sinr, at});
            break;
        }
        default:
            throw DomainError("unknown figure " + std::to_string(figure) + " (expected 4, 6, 7, 8, 9 or 10)");
    }
    return plan;
}

std::string run_compute(const SweepPlan& plan) {
    check_plan(plan);
    std::ostringstream out;
    if (plan.label_series) out << "series,";
    out << plan.parameter << ",p_t,p_s," << column_name(plan, "p_a", "success_prob", "p_a_or_success_prob") << ','
        << column_name(plan, plan.analysis.mu_a_normalized ? "mu_a_normalized" : "mu_a", "gamma", "mu_a_or_gamma")
        << ",throughput_analytic";
    if (plan.sim) out << ",throughput_sim,stderr,trials";
    out << '\n';
    for (std::size_t k = 0; k < plan.series.size(); ++k) {
        const auto& series = plan.series[k];
        for (std::size_t i = 0; i < plan.grid.size(); ++i) {
            const double v = plan.grid[i];
            const RunConfig c = series.at(v);
            const auto row = analytic_row(c, series.kind, plan.analysis);
            if (plan.label_series) out << series.name << ',';
            out << format_number(v) << ',' << format_number(row.p_t) << ',' << format_number(row.p_s) << ','
                << format_number(row.p_x) << ',' << format_number(row.y) << ',' << format_number(row.throughput);
            if (plan.sim) {
                const auto est = simulate_point(c, series.kind, point_sim(*plan.sim, k, i));
                out << ',' << format_number(est.mean) << ',' << format_number(est.std_error) << ',' << est.trials;
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string run_simulate(const SweepPlan& plan) {
    check_plan(plan);
    if (!plan.sim) throw DomainError("simulate needs a sim section or --trials");
    std::ostringstream out;
    if (plan.label_series) out << "series,";
    out << plan.parameter << ",throughput_sim,stderr,trials,r_max,truncation_converged\n";
    for (std::size_t k = 0; k < plan.series.size(); ++k) {
        const auto& series = plan.series[k];
        for (std::size_t i = 0; i < plan.grid.size(); ++i) {
            const double v = plan.grid[i];
            const auto est = simulate_point(series.at(v), series.kind, point_sim(*plan.sim, k, i));
            if (plan.label_series) out << series.name << ',';
            out << format_number(v) << ',' << format_number(est.mean) << ',' << format_number(est.std_error) << ','
                << est.trials << ',' << format_number(est.r_max_used) << ','
                << (est.truncation_converged ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

ValidationReport run_validate(const SweepPlan& plan, const ValidateOptions& options) {
    check_plan(plan);
    if (!plan.sim) throw DomainError("validate needs a sim section or --trials");
    ValidationReport report;
    std::ostringstream out;
    for (std::size_t k = 0; k < plan.series.size(); ++k) {
        const auto& series = plan.series[k];
        for (std::size_t i = 0; i < plan.grid.size(); ++i) {
            ValidationPoint p;
            p.series = series.name;
            p.value = plan.grid[i];
            const RunConfig c = series.at(p.value);
            p.analytic = analytic_row(c, series.kind, plan.analysis).throughput + options.analytic_offset;
            const auto est = simulate_point(c, series.kind, point_sim(*plan.sim, k, i));
            p.simulated = est.mean;
            p.std_error = est.std_error;
            p.converged = est.truncation_converged;
            p.z = proportion_z(p.simulated, p.analytic, p.std_error, est.trials);
            const bool ok = std::abs(p.z) <= options.z_limit && p.converged;
            report.pass = report.pass && ok;
            out << series.name << ' ' << plan.parameter << '=' << format_number(p.value)
                << " analytic=" << format_number(p.analytic) << " simulated=" << format_number(p.simulated)
                << " stderr=" << format_number(p.std_error) << " z=" << format_number(p.z)
                << " converged=" << (p.converged ? "yes" : "no") << ' ' << (ok ? "PASS" : "FAIL") << '\n';
            report.points.push_back(p);
        }
    }
    out << "overall " << (report.pass ? "PASS" : "FAIL") << " points=" << report.points.size() << '\n';
    report.text = out.str();
    return report;
}

double proportion_z(double simulated, double analytic, double sample_stderr, std::uint64_t trials) {
    const double diff = simulated - analytic;
    double se = sample_stderr;
    if (analytic > 0.0 && analytic < 1.0 && trials > 0) se = std::sqrt(analytic * (1.0 - analytic) / double(trials));
    if (se > 0.0) return diff / se;
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

}  // namespace lthru
