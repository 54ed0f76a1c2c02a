#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lthru/config.hpp"

namespace lthru {

/// One curve of a sweep: a configuration for each grid value.
struct Series {
    std::string name;
    AnalysisKind kind = AnalysisKind::connectivity;
    std::function<RunConfig(double)> at;
};

struct SweepPlan {
    std::string parameter = "point";
    std::vector<double> grid{0.0};
    std::vector<Series> series;
    bool label_series = false;  // emit a leading series column
    AnalysisSpec analysis;
    std::optional<SimConfig> sim;
};

/// Plan for a parsed configuration ("both" yields two labelled series).
SweepPlan plan_from_config(const RunConfig& config);

/// Preset sweeps reproducing the throughput figures: 4, 6, 7, 8, 9, 10.
SweepPlan figure_plan(int figure);

/// CSV of analytic values, plus simulated columns when plan.sim is set.
std::string run_compute(const SweepPlan& plan);

/// CSV of simulated values only. plan.sim must be set.
std::string run_simulate(const SweepPlan& plan);

struct ValidationPoint {
    std::string series;
    double value = 0.0;
    double analytic = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool converged = true;
};

struct ValidationReport {
    std::vector<ValidationPoint> points;
    bool pass = true;
    std::string text;
};

struct ValidateOptions {
    double analytic_offset = 0.0;  // added to every analytic value; harness self-test
    double z_limit = 3.0;
};

ValidationReport run_validate(const SweepPlan& plan, const ValidateOptions& options = {});

/// (simulated - analytic) / se for a simulated success fraction. se is the
/// binomial standard error at the analytic value when that lies in (0, 1),
/// else the sample standard error; a zero se gives 0 on an exact match and
/// +-inf otherwise.
double proportion_z(double simulated, double analytic, double sample_stderr, std::uint64_t trials);

/// %.9g, the number format of every CSV cell.
std::string format_number(double x);

}  // namespace lthru
