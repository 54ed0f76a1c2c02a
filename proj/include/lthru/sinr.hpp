#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lthru/model.hpp"
#include "lthru/stable.hpp"

namespace lthru {

enum class Strategy { automatic, closed_form, generic };

std::string to_string(Strategy strategy);
/// Accepts "auto", "closed_form", "generic".
Strategy parse_strategy(const std::string& text);

/// Which evaluation produced a success probability.
enum class SinrMethod {
    path_loss_cdf,         // F_I at the noise-free margin
    shadowing_cdf,         // outer integral over the probe shadowing of F_I
    nakagami_series,       // integer m, finite series in MGF derivatives
    rayleigh,              // m = 1 closed form
    combined_series,       // shadowing outside, integer-m series inside
    combined_rayleigh,     // shadowing outside, m = 1 closed form inside
    generic_quadrature,    // E_I{P(Z0 >= a (I + N))} against the stable density
    generic_non_integer_m, // as above, taken because m is not an integer (or exceeds the series cap)
    generic_monte_carlo,   // custom channels: mean of F_I over sampled probe gains
};

std::string to_string(SinrMethod method);

struct SinrOptions {
    Strategy strategy = Strategy::automatic;
    // Hermite order for the outer shadowing integral; 0 selects adaptive
    // Gauss-Kronrod integration instead.
    int outer_gh_order = 0;
    // Evaluate log-normal shadowing as E_I{Q(.)} against the stable density
    // instead of the outer integral of F_I.
    bool shadowing_q_form = false;
    // Use the general integer-m series at m = 1 instead of the Rayleigh form.
    bool rayleigh_as_series = false;
    DutyCycleMode duty_mode = DutyCycleMode::exact;
    std::uint64_t mc_samples = 20000;
    std::uint64_t mc_seed = 0x73696e72u;
};

struct SuccessProb {
    double value = 0.0;
    SinrMethod method = SinrMethod::path_loss_cdf;
    double error = 0.0;  // quadrature bound or Monte Carlo standard error, when known
};

struct SinrBreakdown {
    double p_t = 0.0;
    double p_s = 0.0;
    double success_prob = 0.0;
    double throughput = 0.0;
    double gamma = 0.0;
    SinrMethod method = SinrMethod::path_loss_cdf;
};

/// P{S / (I + N) >= theta*} for the probe link.
SuccessProb sinr_success_prob(const Scenario& scenario, const PropagationModel& model,
                              const TrafficModel& traffic, const SinrOptions& options = {});

/// Same, with the interference law given directly.
SuccessProb sinr_success_prob(const Scenario& scenario, const PropagationModel& model,
                              const StableParams& interference, const SinrOptions& options = {});

/// p_T p_S P{SINR >= theta*}.
SinrBreakdown sinr_throughput(const Scenario& scenario, const PropagationModel& model,
                              const TrafficModel& traffic, const SinrOptions& options = {});

enum class SensitivityParam { lambda, p1 };

struct SensitivityPoint {
    double value = 0.0;
    double success_prob = 0.0;
};

/// Success probability over a grid of lambda or P1. The dispersion is
/// computed once per unit of the varied parameter and rescaled per point.
std::vector<SensitivityPoint> success_prob_sensitivity(const Scenario& scenario,
                                                       const PropagationModel& model,
                                                       const TrafficModel& traffic, SensitivityParam vary,
                                                       const std::vector<double>& grid,
                                                       const SinrOptions& options = {});

}  // namespace lthru
