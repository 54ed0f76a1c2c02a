#include "lthru/sinr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lthru/errors.hpp"
#include "lthru/numerics.hpp"

namespace lthru {

namespace {

constexpr numerics::Tolerance kOuterTolerance{1e-12, 1e-10, 4000};
constexpr numerics::Tolerance kInnerTolerance{1e-13, 1e-11, 2000};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Link {
    double a;      // r0^2b theta* / P0
    double noise;
};

Link make_link(const Scenario& s) {
    return {std::pow(s.r0, 2.0 * s.b) * s.theta_star / s.p0, s.noise};
}

// E{f(G)} over the probe shadowing variable.
template <typename F>
double outer_expectation(F&& f, std::vector<double> breaks, const SinrOptions& options) {
    if (options.outer_gh_order > 0) return numerics::hermite_expectation(f, options.outer_gh_order);
    return numerics::normal_expectation(f, std::move(breaks), kOuterTolerance).value;
}

// P{Gamma(m, 1/m) >= (nu / m)(I + N)} averaged over I, written as the finite
// series in MGF derivatives at nu.
double nakagami_series(const StableParams& params, double nu, double noise, int m) {
    const auto d = stable_mgf_derivatives(params, nu, m - 1);
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double term = std::pow(-nu, j) * std::pow(nu * noise, k - j) /
                                (numerics::factorial(j) * numerics::factorial(k - j));
            total += term * d[static_cast<std::size_t>(j)];
        }
    }
    return std::clamp(std::exp(-nu * noise) * total, 0.0, 1.0);
}

bool series_applicable(double m) {
    return m == std::round(m) && m <= kMaxMgfDerivativeOrder + 1;
}

double margin_cdf(const StableParams& params, double x) {
    return x > 0.0 ? stable_cdf(params, x) : 0.0;
}

SuccessProb generic_quadrature(const Link& link, const PropagationModel& model, const StableParams& params,
                               SinrMethod tag) {
    ExpectationOptions eo;
    std::function<double(double)> h;
    std::visit(Overloaded{
                   [&](const PathLossOnly&) {
                       const double edge = 1.0 / link.a - link.noise;
                       eo.breakpoints.push_back(edge);
                       h = [edge](double x) { return x <= edge ? 1.0 : 0.0; };
                   },
                   [&](const LogNormalShadowing& c) {
                       const double sigma = c.sigma;
                       if (sigma == 0.0) {
                           const double edge = 1.0 / link.a - link.noise;
                           eo.breakpoints.push_back(edge);
                           h = [edge](double x) { return x <= edge ? 1.0 : 0.0; };
                       } else {
                           h = [link, sigma](double x) {
                               return numerics::gaussian_q(std::log(link.a * (x + link.noise)) / (2.0 * sigma));
                           };
                       }
                   },
                   [&](const NakagamiFading& c) {
                       const double m = c.m;
                       h = [link, m](double x) {
                           return numerics::regularized_gamma_q(m, m * link.a * (x + link.noise));
                       };
                   },
                   [&](const ShadowingAndNakagami& c) {
                       const double m = c.m;
                       const double sigma = c.sigma;
                       h = [link, m, sigma](double x) {
                           const double base = m * link.a * (x + link.noise);
                           auto inner = [&](double g) {
                               return numerics::regularized_gamma_q(m, base * std::exp(-2.0 * sigma * g));
                           };
                           return numerics::normal_expectation(inner, {}, kInnerTolerance).value;
                       };
                   },
                   [&](const CustomChannel&) { throw UnsupportedModeError("custom channels use Monte Carlo"); },
               },
               model.variant());
    const auto r = expectation_over_interference(h, params, ExpectationMethod::quadrature, eo);
    return {std::clamp(r.value, 0.0, 1.0), r.fell_back ? SinrMethod::generic_monte_carlo : tag, r.error};
}

SuccessProb generic_monte_carlo(const Link& link, const PropagationModel& model, const StableParams& params,
                                const SinrOptions& options) {
    Rng rng(options.mc_seed);
    double mean = 0.0;
    double m2 = 0.0;
    const std::uint64_t n = std::max<std::uint64_t>(options.mc_samples, 2);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double z = sample_channel_gain(model, rng);
        const double v = margin_cdf(params, z / link.a - link.noise);
        const double d = v - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (v - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    return {std::clamp(mean, 0.0, 1.0), SinrMethod::generic_monte_carlo, se};
}

SuccessProb closed_form(const Link& link, const PropagationModel& model, const StableParams& params,
                        const SinrOptions& options) {
    auto shadowed_cdf = [&](double sigma) {
        std::vector<double> breaks;
        if (link.noise > 0.0) breaks.push_back(std::log(link.a * link.noise) / (2.0 * sigma));
        auto f = [&](double g) { return margin_cdf(params, std::exp(2.0 * sigma * g) / link.a - link.noise); };
        return SuccessProb{std::clamp(outer_expectation(f, breaks, options), 0.0, 1.0), SinrMethod::shadowing_cdf};
    };
    auto path_loss = [&]() {
        return SuccessProb{margin_cdf(params, 1.0 / link.a - link.noise), SinrMethod::path_loss_cdf};
    };
    auto fading = [&](double m, double nu) -> double {
        if (m == 1.0 && !options.rayleigh_as_series) return std::exp(-nu * link.noise) * stable_mgf(params, nu);
        return nakagami_series(params, nu, link.noise, static_cast<int>(m));
    };
    return std::visit(
        Overloaded{
            [&](const PathLossOnly&) { return path_loss(); },
            [&](const LogNormalShadowing& c) { return c.sigma == 0.0 ? path_loss() : shadowed_cdf(c.sigma); },
            [&](const NakagamiFading& c) {
                if (!series_applicable(c.m)) return generic_quadrature(link, model, params, SinrMethod::generic_non_integer_m);
                const double nu = c.m * link.a;
                const bool ray = c.m == 1.0 && !options.rayleigh_as_series;
                return SuccessProb{fading(c.m, nu), ray ? SinrMethod::rayleigh : SinrMethod::nakagami_series};
            },
            [&](const ShadowingAndNakagami& c) {
                if (!series_applicable(c.m)) return generic_quadrature(link, model, params, SinrMethod::generic_non_integer_m);
                const double nu3 = c.m * link.a;
                const bool ray = c.m == 1.0 && !options.rayleigh_as_series;
                const SinrMethod tag = ray ? SinrMethod::combined_rayleigh : SinrMethod::combined_series;
                if (c.sigma == 0.0) return SuccessProb{fading(c.m, nu3), tag};
                auto f = [&](double g) { return fading(c.m, nu3 * std::exp(-2.0 * c.sigma * g)); };
                return SuccessProb{std::clamp(outer_expectation(f, {}, options), 0.0, 1.0), tag};
            },
            [&](const CustomChannel&) { return generic_monte_carlo(link, model, params, options); },
        },
        model.variant());
}

}  // namespace

std::string to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::automatic: return "auto";
        case Strategy::closed_form: return "closed_form";
        case Strategy::generic: return "generic";
    }
    return "?";
}

Strategy parse_strategy(const std::string& text) {
    if (text == "auto") return Strategy::automatic;
    if (text == "closed_form") return Strategy::closed_form;
    if (text == "generic") return Strategy::generic;
    throw DomainError("unknown strategy '" + text + "' (expected auto, closed_form or generic)");
}

std::string to_string(SinrMethod method) {
    switch (method) {
        case SinrMethod::path_loss_cdf: return "path_loss_cdf";
        case SinrMethod::shadowing_cdf: return "shadowing_cdf";
        case SinrMethod::nakagami_series: return "nakagami_series";
        case SinrMethod::rayleigh: return "rayleigh";
        case SinrMethod::combined_series: return "combined_series";
        case SinrMethod::combined_rayleigh: return "combined_rayleigh";
        case SinrMethod::generic_quadrature: return "generic_quadrature";
        case SinrMethod::generic_non_integer_m: return "generic_non_integer_m";
        case SinrMethod::generic_monte_carlo: return "generic_monte_carlo";
    }
    return "?";
}

SuccessProb sinr_success_prob(const Scenario& scenario, const PropagationModel& model,
                              const StableParams& interference, const SinrOptions& options) {
    check_sinr_scenario(scenario);
    const Link link = make_link(scenario);
    if (model.is_custom()) return generic_monte_carlo(link, model, interference, options);
    const bool q_form = options.shadowing_q_form &&
                        std::holds_alternative<LogNormalShadowing>(model.variant());
    if (options.strategy == Strategy::generic || q_form)
        return generic_quadrature(link, model, interference, SinrMethod::generic_quadrature);
    return closed_form(link, model, interference, options);
}

SuccessProb sinr_success_prob(const Scenario& scenario, const PropagationModel& model,
                              const TrafficModel& traffic, const SinrOptions& options) {
    check_sinr_scenario(scenario);
    return sinr_success_prob(scenario, model, interference_params(scenario, model, traffic, options.duty_mode), options);
}

SinrBreakdown sinr_throughput(const Scenario& scenario, const PropagationModel& model,
                              const TrafficModel& traffic, const SinrOptions& options) {
    check_sinr_scenario(scenario);
    SinrBreakdown out;
    const auto params = interference_params(scenario, model, traffic, options.duty_mode);
    const auto success = sinr_success_prob(scenario, model, params, options);
    out.p_t = transmit_prob(traffic);
    out.p_s = silent_prob(traffic);
    out.success_prob = success.value;
    out.method = success.method;
    out.gamma = params.gamma;
    out.throughput = out.p_t * out.p_s * out.success_prob;
    return out;
}

std::vector<SensitivityPoint> success_prob_sensitivity(const Scenario& scenario, const PropagationModel& model,
                                                       const TrafficModel& traffic, SensitivityParam vary,
                                                       const std::vector<double>& grid,
                                                       const SinrOptions& options) {
    check_sinr_scenario(scenario);
    Scenario unit = scenario;
    if (vary == SensitivityParam::lambda)
        unit.lambda = 1.0;
    else
        unit.p1 = 1.0;
    const StableParams base = interference_params(unit, model, traffic, options.duty_mode);
    std::vector<SensitivityPoint> out;
    out.reserve(grid.size());
    for (double v : grid) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("sensitivity grid values must be positive");
        StableParams p = base;
        Scenario s = scenario;
        if (vary == SensitivityParam::lambda) {
            p.gamma = base.gamma * v;
            s.lambda = v;
        } else {
            p.gamma = base.gamma * std::pow(v, base.alpha);
            s.p1 = v;
        }
        out.push_back({v, sinr_success_prob(s, model, p, options).value});
    }
    return out;
}

}  // namespace lthru
