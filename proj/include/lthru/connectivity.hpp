#pragma once

#include <cstdint>
#include <string>

#include "lthru/model.hpp"

namespace lthru {

/// Which evaluation produced a probe-audibility probability.
enum class AudibilityMethod {
    path_loss_indicator,
    shadowing_q_function,
    nakagami_incomplete_gamma,
    combined_hermite,   // integer m, Hermite series over the shadowing variable
    combined_adaptive,  // adaptive integration over the shadowing variable (any m)
    monte_carlo,        // custom channels
};

std::string to_string(AudibilityMethod method);

struct AudibilityResult {
    double value = 0.0;
    AudibilityMethod method = AudibilityMethod::path_loss_indicator;
    double std_error = 0.0;  // nonzero only for Monte Carlo
    bool fallback = false;  // closed form not applicable (non-integer m)
};

struct ConnectivityOptions {
    int gh_order = 12;
    bool adaptive_combined = false;  // integrate the combined model adaptively even for integer m
    std::uint64_t mc_samples = 200000;
    std::uint64_t mc_seed = 0x6c746872u;
};

struct ConnectivityBreakdown {
    double p_t = 0.0;
    double p_s = 0.0;
    double p_a = 0.0;
    double mu_a = 0.0;
    double no_collision = 0.0;
    double throughput = 0.0;
    AudibilityMethod p_a_method = AudibilityMethod::path_loss_indicator;
    double p_a_stderr = 0.0;
};

/// Mean number of interferers whose received power reaches p_star:
/// pi lambda (P1/P*)^(1/b) prod E{Z^(1/b)}.
double mean_audible_nodes(const Scenario& scenario, const PropagationModel& model);

/// P{no audible node} = exp(-mu_A).
double node_isolation_prob(const Scenario& scenario, const PropagationModel& model);

/// P{P0 prod Z / r0^2b >= P*} for the probe link.
AudibilityResult probe_audible_prob(const Scenario& scenario, const PropagationModel& model,
                                    const ConnectivityOptions& options = {});
AudibilityResult probe_audible_prob(const Scenario& scenario, const PropagationModel& model, int gh_order);

/// exp(-mu_A (1 - p_S)).
double no_collision_prob(double mu_a, double p_s);

ConnectivityBreakdown connectivity_throughput(const Scenario& scenario, const PropagationModel& model,
                                              const TrafficModel& traffic,
                                              const ConnectivityOptions& options = {});

}  // namespace lthru
