#include "lthru/model.hpp"

#include <cmath>
#include <string>

#include "lthru/errors.hpp"
#include "lthru/numerics.hpp"

namespace lthru {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_sigma(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw DomainError("shadowing coefficient sigma must be finite and >= 0");
}

void check_m(double m) {
    if (!(m >= 0.5) || !std::isfinite(m))
        throw DomainError("Nakagami parameter m must be finite and >= 0.5");
}

void check_q(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("transmit probability q must lie in [0, 1]");
}

double lognormal_moment(double sigma, double b) { return std::exp(2.0 * sigma * sigma / (b * b)); }

double nakagami_moment(double m, double b) {
    const double x = 1.0 / b;
    return std::exp(std::lgamma(m + x) - std::lgamma(m) - x * std::log(m));
}

double sample_shadowing(double sigma, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return std::exp(2.0 * sigma * g(rng));
}

double sample_nakagami(double m, Rng& rng) {
    std::gamma_distribution<double> power(m, 1.0 / m);
    double z = power(rng);
    // Gamma draws can underflow to exactly 0 for small m; gains must stay positive.
    while (z <= 0.0) z = power(rng);
    return z;
}

// 1 - e^-y (1 + y), accurate for small y.
double one_minus_exp_poly(double y) {
    if (y < 0.1) {
        double term = 1.0;
        double sum = 0.0;
        for (int n = 1; n <= 12; ++n) {
            term *= -y / n;  // (-y)^n / n!
            if (n >= 2) sum += (n - 1) * term;
        }
        return sum;
    }
    return -std::expm1(-y) - y * std::exp(-y);
}

// Unnormalized CDF of the idle-time density (1 - x) e^(-rho x) on [0, 1].
double busy_busy_cdf(double x, double rho) {
    if (rho < 1e-12) return x - 0.5 * x * x;
    const double y = rho * x;
    return -std::expm1(-y) / rho - one_minus_exp_poly(y) / (rho * rho);
}

double sample_exponential_duty(double rho, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto ev = queue_event_probs(rho);
    const double u = unif(rng);
    if (u < ev.e00) return 0.0;
    const double v = unif(rng);
    if (u < ev.e00 + ev.e01 + ev.e10) {
        // T1 | E01 (and, by symmetry, E10): density proportional to e^(-rho x) on [0, 1].
        const double t1 = rho < 1e-12 ? v : -std::log1p(v * std::expm1(-rho)) / rho;
        return 1.0 - t1;
    }
    // T1 | E11: density proportional to (1 - x) e^(-rho x); invert the CDF numerically.
    const double total = busy_busy_cdf(1.0, rho);
    const double target = v * total;
    const double t1 = numerics::bisect([&](double x) { return busy_busy_cdf(x, rho) - target; },
                                       0.0, 1.0, 1e-10);
    return 1.0 - t1;
}

}  // namespace

void check_connectivity_scenario(const Scenario& s) {
    if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) throw DomainError("density lambda must be finite and >= 0");
    if (!(s.b > 0.0)) throw DomainError("amplitude loss exponent b must be positive");
    if (!(s.p0 > 0.0) || !(s.p1 > 0.0)) throw DomainError("transmit powers p0 and p1 must be positive");
    if (!(s.r0 > 0.0)) throw DomainError("probe link distance r0 must be positive");
    if (!(s.p_star > 0.0)) throw DomainError("audibility threshold p_star must be positive");
}

void check_sinr_scenario(const Scenario& s) {
    if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) throw DomainError("density lambda must be finite and >= 0");
    if (!(s.b > 1.0))
        throw DomainError("b must exceed 1 for the SINR model (the aggregate interference is stable only for b > 1)");
    if (!(s.p0 > 0.0) || !(s.p1 > 0.0)) throw DomainError("transmit powers p0 and p1 must be positive");
    if (!(s.r0 > 0.0)) throw DomainError("probe link distance r0 must be positive");
    if (!(s.theta_star > 0.0)) throw DomainError("SINR threshold theta_star must be positive");
    if (!(s.noise >= 0.0)) throw DomainError("noise power must be >= 0");
}

PropagationModel PropagationModel::path_loss_only() { return PropagationModel(PathLossOnly{}); }

PropagationModel PropagationModel::log_normal_shadowing(double sigma) {
    check_sigma(sigma);
    return PropagationModel(LogNormalShadowing{sigma});
}

PropagationModel PropagationModel::nakagami(double m) {
    check_m(m);
    return PropagationModel(NakagamiFading{m});
}

PropagationModel PropagationModel::shadowing_and_nakagami(double sigma, double m) {
    check_sigma(sigma);
    check_m(m);
    return PropagationModel(ShadowingAndNakagami{sigma, m});
}

PropagationModel PropagationModel::custom(std::function<double(double)> moment_fn,
                                          std::function<double(Rng&)> sampler, std::string name) {
    if (!moment_fn || !sampler) throw ModelError("custom channel needs both a moment function and a sampler");
    return PropagationModel(CustomChannel{std::move(moment_fn), std::move(sampler), std::move(name)});
}

std::optional<double> PropagationModel::sigma() const {
    if (auto* s = std::get_if<LogNormalShadowing>(&v_)) return s->sigma;
    if (auto* c = std::get_if<ShadowingAndNakagami>(&v_)) return c->sigma;
    return std::nullopt;
}

std::optional<double> PropagationModel::m() const {
    if (auto* n = std::get_if<NakagamiFading>(&v_)) return n->m;
    if (auto* c = std::get_if<ShadowingAndNakagami>(&v_)) return c->m;
    return std::nullopt;
}

bool PropagationModel::has_integer_m() const {
    const auto mm = m();
    return mm && *mm == std::floor(*mm);
}

std::string PropagationModel::name() const {
    return std::visit(overloaded{
                          [](const PathLossOnly&) -> std::string { return "path_loss_only"; },
                          [](const LogNormalShadowing&) -> std::string { return "log_normal_shadowing"; },
                          [](const NakagamiFading&) -> std::string { return "nakagami_fading"; },
                          [](const ShadowingAndNakagami&) -> std::string { return "shadowing_and_nakagami"; },
                          [](const CustomChannel& c) -> std::string { return c.name; },
                      },
                      v_);
}

TrafficModel TrafficModel::slotted_sync(double q) {
    check_q(q);
    return TrafficModel(SlottedSync{q});
}

TrafficModel TrafficModel::slotted_async(double q) {
    check_q(q);
    return TrafficModel(SlottedAsync{q});
}

TrafficModel TrafficModel::exponential(double lambda_p, double packet_len) {
    if (!(lambda_p >= 0.0) || !std::isfinite(lambda_p)) throw DomainError("arrival rate lambda_p must be finite and >= 0");
    if (!(packet_len > 0.0) || !std::isfinite(packet_len)) throw DomainError("packet length must be positive");
    return TrafficModel(ExponentialInterarrivals{lambda_p, packet_len});
}

std::string TrafficModel::name() const {
    return std::visit(overloaded{
                          [](const SlottedSync&) -> std::string { return "slotted_sync"; },
                          [](const SlottedAsync&) -> std::string { return "slotted_async"; },
                          [](const ExponentialInterarrivals&) -> std::string { return "exponential_interarrivals"; },
                      },
                      v_);
}

double sigma_from_db(double sigma_db) {
    if (!(sigma_db >= 0.0)) throw DomainError("sigma_db must be >= 0");
    return sigma_db * std::log(10.0) / 20.0;
}

double channel_moment(const PropagationModel& model, double b) {
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("amplitude loss exponent b must be positive");
    return std::visit(overloaded{
                          [](const PathLossOnly&) { return 1.0; },
                          [b](const LogNormalShadowing& s) { return lognormal_moment(s.sigma, b); },
                          [b](const NakagamiFading& n) { return nakagami_moment(n.m, b); },
                          [b](const ShadowingAndNakagami& c) {
                              return lognormal_moment(c.sigma, b) * nakagami_moment(c.m, b);
                          },
                          [b](const CustomChannel& c) {
                              const double v = c.moment_fn(1.0 / b);
                              if (!std::isfinite(v) || v < 0.0)
                                  throw ModelError("custom channel '" + c.name +
                                                   "' returned a non-finite or negative moment");
                              return v;
                          },
                      },
                      model.variant());
}

double sample_channel_gain(const PropagationModel& model, Rng& rng) {
    return std::visit(overloaded{
                          [](const PathLossOnly&) { return 1.0; },
                          [&rng](const LogNormalShadowing& s) { return sample_shadowing(s.sigma, rng); },
                          [&rng](const NakagamiFading& n) { return sample_nakagami(n.m, rng); },
                          [&rng](const ShadowingAndNakagami& c) {
                              const double fading = sample_nakagami(c.m, rng);
                              return fading * sample_shadowing(c.sigma, rng);
                          },
                          [&rng](const CustomChannel& c) {
                              const double z = c.sampler(rng);
                              if (!(z > 0.0)) throw ModelError("custom channel '" + c.name + "' sampled a nonpositive gain");
                              return z;
                          },
                      },
                      model.variant());
}

double transmit_prob(const TrafficModel& traffic) {
    return std::visit(overloaded{
                          [](const SlottedSync& t) { return t.q; },
                          [](const SlottedAsync& t) { return t.q; },
                          [](const ExponentialInterarrivals& t) {
                              return queue_steady_state(t.lambda_p, t.packet_len).pi1;
                          },
                      },
                      traffic.variant());
}

double silent_prob(const TrafficModel& traffic) {
    return std::visit(overloaded{
                          [](const SlottedSync& t) { return 1.0 - t.q; },
                          [](const SlottedAsync& t) { return (1.0 - t.q) * (1.0 - t.q); },
                          [](const ExponentialInterarrivals& t) {
                              const double rho = t.load();
                              return std::exp(-rho) / (1.0 + rho);
                          },
                      },
                      traffic.variant());
}

double duty_cycle_moment(const TrafficModel& traffic, double b, DutyCycleMode mode) {
    if (!(b > 1.0)) throw DomainError("duty_cycle_moment: b must exceed 1");
    const double x = 1.0 / b;
    return std::visit(overloaded{
                          [mode](const SlottedSync& t) {
                              if (mode == DutyCycleMode::approximate)
                                  throw UnsupportedModeError("approximate duty-cycle moment is defined only for exponential traffic");
                              return t.q;
                          },
                          [mode, b](const SlottedAsync& t) {
                              if (mode == DutyCycleMode::approximate)
                                  throw UnsupportedModeError("approximate duty-cycle moment is defined only for exponential traffic");
                              return t.q * t.q + 2.0 * t.q * (1.0 - t.q) * b / (b + 1.0);
                          },
                          [mode, b, x](const ExponentialInterarrivals& t) {
                              const double rho = t.load();
                              if (mode == DutyCycleMode::approximate) return 2.0 * rho * b / (b + 1.0);
                              return 2.0 * rho / (1.0 + rho) * numerics::truncated_exp_moment_integral(x, rho) +
                                     rho * rho / (1.0 + rho) * numerics::truncated_exp_moment_integral(x + 1.0, rho);
                          },
                      },
                      traffic.variant());
}

double sample_duty_cycle(const TrafficModel& traffic, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return std::visit(overloaded{
                          [&](const SlottedSync& t) { return unif(rng) < t.q ? 1.0 : 0.0; },
                          [&](const SlottedAsync& t) {
                              const double u = unif(rng);
                              const double silent = (1.0 - t.q) * (1.0 - t.q);
                              const double both = t.q * t.q;
                              if (u < silent) return 0.0;
                              if (u < silent + both) return 1.0;
                              return unif(rng);  // one adjacent slot: uniform overlap fraction
                          },
                          [&](const ExponentialInterarrivals& t) { return sample_exponential_duty(t.load(), rng); },
                      },
                      traffic.variant());
}

QueueSteadyState queue_steady_state(double lambda_p, double packet_len) {
    if (!(lambda_p >= 0.0)) throw DomainError("arrival rate lambda_p must be >= 0");
    if (!(packet_len > 0.0)) throw DomainError("packet length must be positive");
    const double rho = lambda_p * packet_len;
    return {1.0 / (1.0 + rho), rho / (1.0 + rho)};
}

QueueEventProbs queue_event_probs(double load) {
    if (!(load >= 0.0)) throw DomainError("queue load must be >= 0");
    const double denom = 1.0 + load;
    const double idle_through = std::exp(-load);
    const double one_switch = -std::expm1(-load) / denom;
    // rho + e^-rho - 1 loses everything to cancellation for small rho.
    const double busy_busy = (load < 1e-3 ? load * load * (0.5 - load / 6.0 + load * load / 24.0)
                                          : load + std::expm1(-load)) /
                             denom;
    return {idle_through / denom, one_switch, one_switch, busy_busy};
}

}  // namespace lthru
