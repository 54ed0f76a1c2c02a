#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>

namespace lthru {

/// Random source used by every sampler in the library.
using Rng = std::mt19937_64;

/// Link and network parameters. Powers are linear; distances in meters.
struct Scenario {
    double lambda = 1.0;      // interferer density, nodes per unit area
    double b = 2.0;           // amplitude loss exponent (power decays as R^-2b)
    double p0 = 10.0;         // probe transmit power
    double p1 = 10.0;         // interferer transmit power
    double r0 = 1.0;          // probe link distance
    double p_star = 1.0;      // audibility threshold (connectivity model)
    double theta_star = 1.0;  // SINR threshold (SINR model)
    double noise = 0.0;       // noise power N (SINR model)
};

/// Throws DomainError unless the fields needed by the connectivity model are valid.
void check_connectivity_scenario(const Scenario& s);
/// Throws DomainError unless the fields needed by the SINR model are valid (b > 1 included).
void check_sinr_scenario(const Scenario& s);

// Channel effects: the product of the Z_k multiplying P_tx / R^2b.
struct PathLossOnly {};
struct LogNormalShadowing {
    double sigma;  // Z = exp(2 sigma G), G ~ N(0, 1)
};
struct NakagamiFading {
    double m;  // Z ~ Gamma(shape m, scale 1/m), unit mean
};
struct ShadowingAndNakagami {
    double sigma;
    double m;
};
/// Arbitrary channel supplied as E{prod Z_k^x} and a sampler of prod Z_k.
/// Keeping the two consistent is the caller's job.
struct CustomChannel {
    std::function<double(double)> moment_fn;
    std::function<double(Rng&)> sampler;
    std::string name = "custom";
};

class PropagationModel {
public:
    using Variant = std::variant<PathLossOnly, LogNormalShadowing, NakagamiFading,
                                 ShadowingAndNakagami, CustomChannel>;

    static PropagationModel path_loss_only();
    static PropagationModel log_normal_shadowing(double sigma);
    static PropagationModel nakagami(double m);
    static PropagationModel rayleigh() { return nakagami(1.0); }
    static PropagationModel shadowing_and_nakagami(double sigma, double m);
    static PropagationModel custom(std::function<double(double)> moment_fn,
                                   std::function<double(Rng&)> sampler, std::string name = "custom");

    const Variant& variant() const noexcept { return v_; }

    /// Shadowing coefficient, if the model has a log-normal component.
    std::optional<double> sigma() const;
    /// Nakagami parameter, if the model has a fading component.
    std::optional<double> m() const;
    bool has_integer_m() const;
    bool is_custom() const { return std::holds_alternative<CustomChannel>(v_); }

    std::string name() const;

private:
    explicit PropagationModel(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

struct SlottedSync {
    double q;
};
struct SlottedAsync {
    double q;
};
/// M/D/1/1 transmit queue: Poisson arrivals at lambda_p, packets of length packet_len.
struct ExponentialInterarrivals {
    double lambda_p;
    double packet_len;
    double load() const { return lambda_p * packet_len; }
};

class TrafficModel {
public:
    using Variant = std::variant<SlottedSync, SlottedAsync, ExponentialInterarrivals>;

    static TrafficModel slotted_sync(double q);
    static TrafficModel slotted_async(double q);
    static TrafficModel exponential(double lambda_p, double packet_len);

    const Variant& variant() const noexcept { return v_; }
    std::string name() const;

private:
    explicit TrafficModel(Variant v) : v_(v) {}
    Variant v_;
};

enum class DutyCycleMode { exact, approximate };

struct QueueSteadyState {
    double pi0;
    double pi1;
};

/// Probabilities of the state-transition events E_{k,l} = {Q(0) = k, Q(L) = l}
/// of the M/D/1/1 queue over one packet interval.
struct QueueEventProbs {
    double e00, e01, e10, e11;
};

double sigma_from_db(double sigma_db);

/// prod_k E{Z_k^(1/b)}.
double channel_moment(const PropagationModel& model, double b);

/// One draw of prod_k Z_k.
double sample_channel_gain(const PropagationModel& model, Rng& rng);

double transmit_prob(const TrafficModel& traffic);
double silent_prob(const TrafficModel& traffic);

/// E{Delta^(1/b)} of the interferer duty-cycle factor.
double duty_cycle_moment(const TrafficModel& traffic, double b,
                         DutyCycleMode mode = DutyCycleMode::exact);

/// One draw of the duty-cycle factor Delta in [0, 1].
double sample_duty_cycle(const TrafficModel& traffic, Rng& rng);

QueueSteadyState queue_steady_state(double lambda_p, double packet_len);
QueueEventProbs queue_event_probs(double load);

}  // namespace lthru
