#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lthru/model.hpp"

namespace lthru {

struct SimConfig {
    std::uint64_t trials = 100000;
    std::optional<double> r_max;  // empty: chosen automatically
    std::uint64_t master_seed = 1;
    std::optional<double> target_stderr;  // stop early once reached
    // Add the mean interference from beyond r_max to every trial (SINR and
    // interference runs only).
    bool far_field_correction = true;
    int max_doublings = 6;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Throws DomainError for an invalid configuration.
void check_sim_config(const SimConfig& config, double r0);

struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(trials)
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double r_max_used = 0.0;
    bool truncation_converged = true;
    std::map<std::string, double> extras;
    std::vector<std::uint64_t> histogram;               // audible-count runs
    std::vector<std::pair<double, double>> quantiles;   // (probability, value), interference runs
    std::vector<double> samples;                        // interference runs
};

/// Distances of a Poisson field of density lambda in the disc of radius
/// r_max about the origin, ascending.
std::vector<double> generate_field(double lambda, double r_max, Rng& rng);

/// Per-trial number of nodes with P1 Z / R^2b >= P*.
SimEstimate simulate_audible_count(const Scenario& scenario, const PropagationModel& model,
                                   const SimConfig& config);

/// Fraction of trials in which the probe packet is received without
/// collision under the connectivity model.
SimEstimate simulate_connectivity_throughput(const Scenario& scenario, const PropagationModel& model,
                                             const TrafficModel& traffic, const SimConfig& config);

/// Aggregate interference at the origin. The mean is reported but the law
/// has no finite mean; compare quantiles.
SimEstimate simulate_interference(const Scenario& scenario, const PropagationModel& model,
                                  const TrafficModel& traffic, const SimConfig& config);

/// Fraction of trials with probe on, receiver silent and S / (I + N) >= theta*.
SimEstimate simulate_sinr_throughput(const Scenario& scenario, const PropagationModel& model,
                                     const TrafficModel& traffic, const SimConfig& config);

/// Radius beyond which a single node is audible with probability below 1e-6.
double connectivity_auto_radius(const Scenario& scenario, const PropagationModel& model);

}  // namespace lthru
