#include "lthru/connectivity.hpp"

#include <cmath>

#include "lthru/errors.hpp"
#include "lthru/numerics.hpp"

namespace lthru {

namespace {

using numerics::kPi;

// P* r0^2b / P0: the channel gain the probe needs to be heard.
double required_gain(const Scenario& s) { return s.p_star * std::pow(s.r0, 2.0 * s.b) / s.p0; }

// Integer-m closed form of Q(m, nu) = sum_{k<m} nu^k e^-nu / k!.
double poisson_tail_sum(int m, double nu) {
    double term = std::exp(-nu);
    double sum = term;
    for (int k = 1; k < m; ++k) {
        term *= nu / k;
        sum += term;
    }
    return sum;
}

AudibilityResult combined_audibility(const Scenario& s, double sigma, double m, const ConnectivityOptions& opt) {
    const double nu1 = required_gain(s) * m;
    const bool integer_m = m == std::floor(m);
    if (integer_m && !opt.adaptive_combined) {
        // p_A ~ 1 - (1 - (1/sqrt pi) sum_k sum_n w_n nu2^k e^-nu2 / k!), nu2 = nu1 e^(2 sqrt2 sigma x_n).
        const auto& rule = numerics::gauss_hermite_cached(opt.gh_order);
        const int mi = static_cast<int>(m);
        double acc = 0.0;
        for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
            const double nu2 = nu1 * std::exp(2.0 * numerics::kSqrt2 * sigma * rule.nodes[n]);
            acc += rule.weights[n] * poisson_tail_sum(mi, nu2);
        }
        return {acc / numerics::kSqrtPi, AudibilityMethod::combined_hermite, 0.0, false};
    }
    auto conditional = [nu1, sigma, m](double g) {
        return numerics::regularized_gamma_q(m, nu1 * std::exp(-2.0 * sigma * g));
    };
    const auto r = numerics::normal_expectation(conditional, {}, {1e-12, 1e-10, 4000});
    return {r.value, AudibilityMethod::combined_adaptive, 0.0, !integer_m};
}

}  // namespace

std::string to_string(AudibilityMethod method) {
    switch (method) {
        case AudibilityMethod::path_loss_indicator: return "path_loss_indicator";
        case AudibilityMethod::shadowing_q_function: return "shadowing_q_function";
        case AudibilityMethod::nakagami_incomplete_gamma: return "nakagami_incomplete_gamma";
        case AudibilityMethod::combined_hermite: return "combined_hermite";
        case AudibilityMethod::combined_adaptive: return "combined_adaptive";
        case AudibilityMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

double mean_audible_nodes(const Scenario& scenario, const PropagationModel& model) {
    check_connectivity_scenario(scenario);
    const double moment = channel_moment(model, scenario.b);
    return kPi * scenario.lambda * std::pow(scenario.p1 / scenario.p_star, 1.0 / scenario.b) * moment;
}

double node_isolation_prob(const Scenario& scenario, const PropagationModel& model) {
    return std::exp(-mean_audible_nodes(scenario, model));
}

AudibilityResult probe_audible_prob(const Scenario& scenario, const PropagationModel& model, int gh_order) {
    ConnectivityOptions opt;
    opt.gh_order = gh_order;
    return probe_audible_prob(scenario, model, opt);
}

AudibilityResult probe_audible_prob(const Scenario& s, const PropagationModel& model,
                                    const ConnectivityOptions& opt) {
    check_connectivity_scenario(s);
    if (opt.gh_order < 1 || opt.gh_order > 64) throw DomainError("gh_order must be in [1, 64]");
    const double need = required_gain(s);
    const auto& v = model.variant();

    if (std::holds_alternative<PathLossOnly>(v))
        // Boundary r0 = (P0/P*)^(1/2b) counts as audible.
        return {need <= 1.0 ? 1.0 : 0.0, AudibilityMethod::path_loss_indicator};

    if (auto* sh = std::get_if<LogNormalShadowing>(&v)) {
        if (sh->sigma == 0.0) return {need <= 1.0 ? 1.0 : 0.0, AudibilityMethod::shadowing_q_function};
        return {numerics::gaussian_q(std::log(need) / (2.0 * sh->sigma)), AudibilityMethod::shadowing_q_function};
    }

    if (auto* nk = std::get_if<NakagamiFading>(&v))
        return {numerics::regularized_gamma_q(nk->m, need * nk->m), AudibilityMethod::nakagami_incomplete_gamma};

    if (auto* c = std::get_if<ShadowingAndNakagami>(&v)) return combined_audibility(s, c->sigma, c->m, opt);

    // Custom channel: no closed form, estimate from the sampler.
    Rng rng(opt.mc_seed);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < opt.mc_samples; ++i)
        if (sample_channel_gain(model, rng) >= need) ++hits;
    const double n = static_cast<double>(opt.mc_samples);
    const double p = static_cast<double>(hits) / n;
    return {p, AudibilityMethod::monte_carlo, std::sqrt(p * (1.0 - p) / n), true};
}

double no_collision_prob(double mu_a, double p_s) {
    if (!(mu_a >= 0.0)) throw DomainError("no_collision_prob: mu_A must be >= 0");
    if (!(p_s >= 0.0 && p_s <= 1.0)) throw DomainError("no_collision_prob: p_S must lie in [0, 1]");
    return std::exp(-mu_a * (1.0 - p_s));
}

ConnectivityBreakdown connectivity_throughput(const Scenario& scenario, const PropagationModel& model,
                                              const TrafficModel& traffic, const ConnectivityOptions& options) {
    ConnectivityBreakdown out;
    out.p_t = transmit_prob(traffic);
    out.p_s = silent_prob(traffic);
    const auto audible = probe_audible_prob(scenario, model, options);
    out.p_a = audible.value;
    out.p_a_method = audible.method;
    out.p_a_stderr = audible.std_error;
    out.mu_a = mean_audible_nodes(scenario, model);
    out.no_collision = no_collision_prob(out.mu_a, out.p_s);
    out.throughput = out.p_t * out.p_s * out.p_a * out.no_collision;
    return out;
}

}  // namespace lthru
