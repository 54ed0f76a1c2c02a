// Command-line front end: compute, simulate, validate, figure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lthru/config.hpp"
#include "lthru/errors.hpp"
#include "lthru/runner.hpp"

namespace {

constexpr int kExitValidationFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr std::uint64_t kDefaultTrials = 100000;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::string rmax;
    std::string strategy;
    int figure = 0;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
    auto* opt = cmd->add_option("--config", f.config, "JSON run configuration");
    if (needs_config) opt->required();
    cmd->add_option("--out", f.out, "write output to this file instead of stdout");
    cmd->add_option("--seed", f.seed, "master seed for the simulator");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
    cmd->add_option("--rmax", f.rmax, "field truncation radius in meters, or auto");
    cmd->add_option("--strategy", f.strategy, "auto, closed_form or generic")
        ->check(CLI::IsMember({"auto", "closed_form", "generic"}));
}

void apply_overrides(lthru::SweepPlan& plan, const Flags& f, double r0, bool want_sim) {
    if (!f.strategy.empty()) plan.analysis.strategy = lthru::parse_strategy(f.strategy);
    const bool sim_flags = f.seed || f.trials || !f.rmax.empty();
    if (!plan.sim && (sim_flags || want_sim)) {
        if (!sim_flags && want_sim)
            throw lthru::ConfigError("sim", "this command needs a sim section or --trials");
        plan.sim = lthru::SimConfig{};
        plan.sim->trials = kDefaultTrials;
    }
    if (!plan.sim) return;
    if (f.trials) plan.sim->trials = *f.trials;
    if (f.seed) plan.sim->master_seed = *f.seed;
    if (!f.rmax.empty()) {
        if (f.rmax == "auto") {
            plan.sim->r_max.reset();
        } else {
            double r = 0.0;
            try {
                std::size_t used = 0;
                r = std::stod(f.rmax, &used);
                if (used != f.rmax.size()) throw std::invalid_argument("trailing text");
            } catch (const std::exception&) {
                throw lthru::ConfigError("--rmax", "expected meters or auto, got '" + f.rmax + "'");
            }
            if (!(r > r0)) throw lthru::ConfigError("--rmax", "must exceed the probe distance r0");
            plan.sim->r_max = r;
        }
    }
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw lthru::ConfigError(path, "cannot open output file");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local throughput of a wireless link in a Poisson field of interferers"};
    app.require_subcommand(1);
    Flags f;
    auto* compute = app.add_subcommand("compute", "analytic values for one point or a sweep (CSV)");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates only (CSV)");
    auto* validate = app.add_subcommand("validate", "analytic vs Monte Carlo z-score report");
    auto* figure = app.add_subcommand("figure", "preset sweep for figure 4, 6, 7, 8, 9 or 10 (CSV)");
    add_common(compute, f, true);
    add_common(simulate, f, true);
    add_common(validate, f, true);
    add_common(figure, f, false);
    figure->add_option("number", f.figure, "figure number")->required()->check(CLI::IsMember({4, 6, 7, 8, 9, 10}));

    CLI11_PARSE(app, argc, argv);

    try {
        lthru::SweepPlan plan;
        std::string out_path = f.out;
        double r0 = 1.0;
        if (figure->parsed()) {
            plan = lthru::figure_plan(f.figure);
        } else {
            const auto config = lthru::load_config(f.config);
            plan = lthru::plan_from_config(config);
            r0 = config.scenario.r0;
            if (out_path.empty() && config.output) out_path = *config.output;
        }
        const bool want_sim = simulate->parsed() || validate->parsed();
        apply_overrides(plan, f, r0, want_sim);
        if (validate->parsed()) {
            const auto report = lthru::run_validate(plan);
            emit(report.text, out_path);
            return report.pass ? 0 : kExitValidationFailed;
        }
        emit(simulate->parsed() ? lthru::run_simulate(plan) : lthru::run_compute(plan), out_path);
        return 0;
    } catch (const lthru::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}
