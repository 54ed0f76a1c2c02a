#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lthru/connectivity.hpp"
#include "lthru/model.hpp"
#include "lthru/sim.hpp"
#include "lthru/sinr.hpp"

namespace lthru {

struct PropagationSpec {
    // path_loss_only | log_normal_shadowing | nakagami | rayleigh | shadowing_and_nakagami
    std::string model = "path_loss_only";
    double sigma = 0.0;  // natural-log units; sigma_db is converted on input
    double m = 1.0;

    PropagationModel build() const;
};

struct TrafficSpec {
    std::string pattern = "slotted_sync";  // slotted_sync | slotted_async | exponential
    double q = 0.5;
    double lambda_p = 1.0;
    double packet_len = 1.0;

    TrafficModel build() const;
};

enum class AnalysisKind { connectivity, sinr, both };

struct AnalysisSpec {
    AnalysisKind kind = AnalysisKind::connectivity;
    Strategy strategy = Strategy::automatic;
    int gh_order = 12;
    int outer_gh_order = 0;
    DutyCycleMode duty_mode = DutyCycleMode::exact;
    // Report mu_A / (pi lambda (P1/P*)^(1/b)) in the mu_A column.
    bool mu_a_normalized = false;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

struct RunConfig {
    Scenario scenario;
    PropagationSpec propagation;
    TrafficSpec traffic;
    AnalysisSpec analysis;
    std::optional<SweepSpec> sweep;
    std::optional<SimConfig> sim;
    std::optional<std::string> output;
};

/// Parses a JSON run configuration. Throws ConfigError naming the offending
/// field (or the line, for malformed JSON).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Names accepted as sweep parameters.
const std::vector<std::string>& sweep_parameters();

/// Copy of `config` with the sweep parameter set to `value`.
RunConfig apply_sweep_value(const RunConfig& config, const std::string& parameter, double value);

/// start, start + step, ..., stop, generated on the decimal grid of the inputs.
std::vector<double> decimal_range(double start, double stop, double step);

/// Linear power from a JSON-style string such as "10dB" or "3.5".
double parse_power(const std::string& text);

}  // namespace lthru
