#include "lthru/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "lthru/errors.hpp"
#include "lthru/numerics.hpp"

namespace lthru {

namespace {

using numerics::kPi;

constexpr std::uint64_t kChunkTrials = 1024;
constexpr std::uint64_t kWaveChunks = 16;
constexpr double kAudibleTail = 1e-6;
constexpr double kSinrStartNodes = 256.0;
constexpr std::uint64_t kDutyMeanDraws = 100000;

enum Stream : std::uint32_t {
    kStreamAudible = 1,
    kStreamConnectivity = 2,
    kStreamInterference = 3,
    kStreamSinr = 4,
    kStreamDutyMean = 5,
    kStreamCustomGain = 6,
};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Rng make_rng(std::uint64_t master, std::uint32_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32), stream,
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

// Running mean and sum of squared deviations; merge() follows Chan et al.
struct Moments {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct ChunkResult {
    Moments value;
    Moments delta;  // change when the field is extended to twice the radius
    std::vector<double> samples;
    std::vector<double> samples_doubled;
    std::vector<std::uint64_t> histogram;
};

using ChunkFn = std::function<ChunkResult(std::uint64_t trials, Rng& rng)>;

struct RunTotals {
    Moments value;
    Moments delta;
    std::vector<double> samples;
    std::vector<double> samples_doubled;
    std::vector<std::uint64_t> histogram;
};

// Runs config.trials trials in chunks seeded from (master_seed, stream, chunk
// index). Chunks are reduced in index order, so the result does not depend on
// the number of threads.
RunTotals run_chunks(const SimConfig& config, std::uint32_t stream, const ChunkFn& fn) {
    const std::uint64_t n_chunks = (config.trials + kChunkTrials - 1) / kChunkTrials;
    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    RunTotals totals;
    for (std::uint64_t wave = 0; wave < n_chunks; wave += kWaveChunks) {
        const std::uint64_t end = std::min(n_chunks, wave + kWaveChunks);
        std::vector<ChunkResult> results(end - wave);
        auto work = [&](std::uint64_t c) {
            const std::uint64_t first = c * kChunkTrials;
            const std::uint64_t count = std::min(kChunkTrials, config.trials - first);
            Rng rng = make_rng(config.master_seed, stream, c);
            results[c - wave] = fn(count, rng);
        };
        if (threads <= 1) {
            for (std::uint64_t c = wave; c < end; ++c) work(c);
        } else {
            std::vector<std::thread> pool;
            const unsigned used = static_cast<unsigned>(std::min<std::uint64_t>(threads, end - wave));
            for (unsigned t = 0; t < used; ++t)
                pool.emplace_back([&, t] {
                    for (std::uint64_t c = wave + t; c < end; c += used) work(c);
                });
            for (auto& th : pool) th.join();
        }
        for (auto& r : results) {
            totals.value.merge(r.value);
            totals.delta.merge(r.delta);
            totals.samples.insert(totals.samples.end(), r.samples.begin(), r.samples.end());
            totals.samples_doubled.insert(totals.samples_doubled.end(), r.samples_doubled.begin(),
                                          r.samples_doubled.end());
            if (totals.histogram.size() < r.histogram.size()) totals.histogram.resize(r.histogram.size(), 0);
            for (std::size_t i = 0; i < r.histogram.size(); ++i) totals.histogram[i] += r.histogram[i];
        }
        if (config.target_stderr && totals.value.n > 1 && totals.value.std_error() <= *config.target_stderr)
            break;
    }
    return totals;
}

// Transmission activity of one node over the probe packet interval, drawn
// from the traffic timeline. Times are in units of the packet length.
class Activity {
public:
    explicit Activity(const TrafficModel& traffic) : traffic_(traffic) {}

    bool probe_transmits(Rng& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        return std::visit(Overloaded{
                              [&](const SlottedSync& t) { return unif(rng) < t.q; },
                              [&](const SlottedAsync& t) { return unif(rng) < t.q; },
                              [&](const ExponentialInterarrivals& t) {
                                  // Renewal cycle: one packet, then an idle gap with mean 1/lambda_p.
                                  const double busy = t.packet_len / (t.packet_len + 1.0 / t.lambda_p);
                                  return t.lambda_p > 0.0 && unif(rng) < busy;
                              },
                          },
                          traffic_.variant());
    }

    // Fraction of the probe packet interval during which the node transmits.
    double duty(Rng& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        return std::visit(Overloaded{
                              [&](const SlottedSync& t) { return unif(rng) < t.q ? 1.0 : 0.0; },
                              [&](const SlottedAsync& t) {
                                  // Slot boundary falls at a uniform offset inside the probe packet.
                                  const double offset = unif(rng);
                                  const double first = unif(rng) < t.q ? 1.0 : 0.0;
                                  const double second = unif(rng) < t.q ? 1.0 : 0.0;
                                  return first * offset + second * (1.0 - offset);
                              },
                              [&](const ExponentialInterarrivals& t) {
                                  if (!(t.lambda_p > 0.0)) return 0.0;
                                  const double busy = t.packet_len / (t.packet_len + 1.0 / t.lambda_p);
                                  // Residual service of a packet in progress is uniform on (0, L).
                                  const double residual = unif(rng) < busy ? unif(rng) : 0.0;
                                  std::exponential_distribution<double> gap(t.load());
                                  const double next_start = residual + gap(rng);
                                  return residual + std::max(0.0, 1.0 - next_start);
                              },
                          },
                          traffic_.variant());
    }

private:
    const TrafficModel& traffic_;
};

// Squared distances of a Poisson field in the annulus inner < R <= outer, unsorted.
void field_squared(double lambda, double inner, double outer, Rng& rng, std::vector<double>& out) {
    out.clear();
    const double a2 = inner * inner;
    const double span = outer * outer - a2;
    const double mean = lambda * kPi * span;
    if (!(mean > 0.0)) return;
    std::poisson_distribution<std::uint64_t> count(mean);
    const std::uint64_t n = count(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(a2 + span * unif(rng));
}

double gain_upper_quantile(const PropagationModel& model, double tail) {
    auto gamma_quantile = [tail](double m) {
        return std::exp(numerics::bisect(
            [&](double lt) { return tail - numerics::regularized_gamma_q(m, m * std::exp(lt)); }, -50.0, 50.0,
            1e-12));
    };
    return std::visit(
        Overloaded{
            [](const PathLossOnly&) { return 1.0; },
            [&](const LogNormalShadowing& c) { return std::exp(2.0 * c.sigma * numerics::gaussian_q_inverse(tail)); },
            [&](const NakagamiFading& c) { return gamma_quantile(c.m); },
            [&](const ShadowingAndNakagami& c) {
                if (c.sigma == 0.0) return gamma_quantile(c.m);
                auto exceed = [&](double lt) {
                    auto inner = [&](double g) {
                        return numerics::regularized_gamma_q(c.m, c.m * std::exp(lt - 2.0 * c.sigma * g));
                    };
                    return numerics::normal_expectation(inner).value;
                };
                return std::exp(numerics::bisect([&](double lt) { return tail - exceed(lt); }, -60.0, 120.0, 1e-10));
            },
            [&](const CustomChannel&) {
                Rng rng = make_rng(0, kStreamCustomGain, 0);
                double top = 0.0;
                for (int i = 0; i < 100000; ++i) top = std::max(top, sample_channel_gain(model, rng));
                return 10.0 * top;
            },
        },
        model.variant());
}

double sinr_start_radius(const Scenario& s) {
    double r = 4.0 * s.r0;
    if (s.lambda > 0.0) r = std::max(r, std::sqrt(kSinrStartNodes / (kPi * s.lambda)));
    return r;
}

struct FarField {
    double coeff = 0.0;  // mean interference beyond R is coeff * R^(2 - 2b)
    double at(double r, double b) const { return coeff * std::pow(r, 2.0 - 2.0 * b); }
};

FarField far_field(const Scenario& s, const PropagationModel& model, const TrafficModel& traffic,
                   const SimConfig& config, SimEstimate& est) {
    FarField out;
    if (!config.far_field_correction || s.lambda == 0.0) return out;
    double mean_gain = 0.0;
    try {
        mean_gain = channel_moment(model, 1.0);
    } catch (const ModelError&) {
        est.extras["far_field_unavailable"] = 1.0;
        return out;
    }
    Activity act(traffic);
    Rng rng = make_rng(config.master_seed, kStreamDutyMean, 0);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < kDutyMeanDraws; ++i) sum += act.duty(rng);
    const double mean_duty = sum / static_cast<double>(kDutyMeanDraws);
    out.coeff = kPi * s.lambda * s.p1 * mean_duty * mean_gain / (s.b - 1.0);
    est.extras["mean_duty"] = mean_duty;
    return out;
}

bool converged(const RunTotals& t) {
    return std::abs(t.delta.mean) <= std::max(t.value.std_error(), 1e-4);
}

void fill_common(SimEstimate& est, const RunTotals& t, const SimConfig& config, double r) {
    est.mean = t.value.mean;
    est.std_error = t.value.std_error();
    est.trials = t.value.n;
    est.seed = config.master_seed;
    est.r_max_used = r;
    est.truncation_converged = converged(t);
    est.extras["variance"] = t.value.variance();
    est.extras["truncation_delta"] = t.delta.mean;
    est.extras["truncation_delta_stderr"] = t.delta.std_error();
}

// Repeats `run` at doubling radii until extending the field to twice the
// radius no longer moves the estimate, or the doubling budget is spent.
template <typename Run>
SimEstimate with_radius_search(const SimConfig& config, double start, Run&& run) {
    double r = config.r_max ? *config.r_max : start;
    const int budget = config.r_max ? 0 : config.max_doublings;
    SimEstimate est;
    for (int k = 0;; ++k) {
        est = run(r);
        est.extras["doublings"] = k;
        if (est.truncation_converged || k >= budget) break;
        r *= 2.0;
    }
    return est;
}

}  // namespace

void check_sim_config(const SimConfig& config, double r0) {
    if (config.trials < 1) throw DomainError("sim: trials must be at least 1");
    if (config.r_max && !(*config.r_max > r0))
        throw DomainError("sim: r_max must exceed the probe distance r0");
    if (config.target_stderr && !(*config.target_stderr > 0.0))
        throw DomainError("sim: target_stderr must be positive");
    if (config.max_doublings < 0) throw DomainError("sim: max_doublings must be >= 0");
}

std::vector<double> generate_field(double lambda, double r_max, Rng& rng) {
    if (!(lambda >= 0.0)) throw DomainError("generate_field: lambda must be >= 0");
    if (!(r_max > 0.0)) throw DomainError("generate_field: r_max must be positive");
    std::vector<double> r;
    field_squared(lambda, 0.0, r_max, rng, r);
    for (double& x : r) x = std::sqrt(x);
    std::sort(r.begin(), r.end());
    return r;
}

double connectivity_auto_radius(const Scenario& scenario, const PropagationModel& model) {
    check_connectivity_scenario(scenario);
    const double z = gain_upper_quantile(model, kAudibleTail);
    return std::pow(scenario.p1 * z / scenario.p_star, 1.0 / (2.0 * scenario.b));
}

SimEstimate simulate_audible_count(const Scenario& scenario, const PropagationModel& model,
                                   const SimConfig& config) {
    check_connectivity_scenario(scenario);
    check_sim_config(config, 0.0);
    const Scenario s = scenario;
    auto run = [&](double r) {
        ChunkFn fn = [&, r](std::uint64_t trials, Rng& rng) {
            ChunkResult out;
            std::vector<double> u;
            auto count = [&](double inner, double outer) {
                field_squared(s.lambda, inner, outer, rng, u);
                std::uint64_t n = 0;
                for (double x : u)
                    if (s.p1 * sample_channel_gain(model, rng) >= s.p_star * std::pow(x, s.b)) ++n;
                return n;
            };
            for (std::uint64_t i = 0; i < trials; ++i) {
                const std::uint64_t n = count(0.0, r);
                const std::uint64_t extra = count(r, 2.0 * r);
                out.value.add(static_cast<double>(n));
                out.delta.add(static_cast<double>(extra));
                if (out.histogram.size() <= n) out.histogram.resize(n + 1, 0);
                ++out.histogram[n];
            }
            return out;
        };
        const auto totals = run_chunks(config, kStreamAudible, fn);
        SimEstimate est;
        fill_common(est, totals, config, r);
        est.histogram = totals.histogram;
        est.extras["index_of_dispersion"] = est.mean > 0.0 ? totals.value.variance() / est.mean : 0.0;
        return est;
    };
    return with_radius_search(config, connectivity_auto_radius(scenario, model), run);
}

SimEstimate simulate_connectivity_throughput(const Scenario& scenario, const PropagationModel& model,
                                             const TrafficModel& traffic, const SimConfig& config) {
    check_connectivity_scenario(scenario);
    check_sim_config(config, scenario.r0);
    const Scenario s = scenario;
    const Activity act(traffic);
    const double probe_loss = std::pow(s.r0, 2.0 * s.b);
    auto run = [&](double r) {
        ChunkFn fn = [&, r](std::uint64_t trials, Rng& rng) {
            ChunkResult out;
            std::vector<double> u;
            // True if some audible node in the annulus transmits during the probe packet.
            auto collides = [&](double inner, double outer) {
                field_squared(s.lambda, inner, outer, rng, u);
                bool hit = false;
                for (double x : u) {
                    if (s.p1 * sample_channel_gain(model, rng) < s.p_star * std::pow(x, s.b)) continue;
                    if (act.duty(rng) > 0.0) hit = true;
                }
                return hit;
            };
            for (std::uint64_t i = 0; i < trials; ++i) {
                bool ok = act.probe_transmits(rng) && act.duty(rng) == 0.0 &&
                          s.p0 * sample_channel_gain(model, rng) >= s.p_star * probe_loss;
                double delta = 0.0;
                if (ok) {
                    ok = !collides(0.0, r);
                    if (ok && collides(r, 2.0 * r)) delta = -1.0;
                }
                out.value.add(ok ? 1.0 : 0.0);
                out.delta.add(delta);
            }
            return out;
        };
        const auto totals = run_chunks(config, kStreamConnectivity, fn);
        SimEstimate est;
        fill_common(est, totals, config, r);
        return est;
    };
    return with_radius_search(config, connectivity_auto_radius(scenario, model), run);
}

SimEstimate simulate_interference(const Scenario& scenario, const PropagationModel& model,
                                  const TrafficModel& traffic, const SimConfig& config) {
    check_sinr_scenario(scenario);
    check_sim_config(config, scenario.r0);
    const Scenario s = scenario;
    const Activity act(traffic);
    SimEstimate base;
    const FarField far = far_field(s, model, traffic, config, base);
    auto run = [&](double r) {
        const double tail_r = far.at(r, s.b);
        const double tail_2r = far.at(2.0 * r, s.b);
        ChunkFn fn = [&, r](std::uint64_t trials, Rng& rng) {
            ChunkResult out;
            std::vector<double> u;
            auto sum = [&](double inner, double outer) {
                field_squared(s.lambda, inner, outer, rng, u);
                double acc = 0.0;
                for (double x : u) {
                    const double d = act.duty(rng);
                    if (d > 0.0) acc += s.p1 * d * sample_channel_gain(model, rng) / std::pow(x, s.b);
                }
                return acc;
            };
            out.samples.reserve(trials);
            out.samples_doubled.reserve(trials);
            for (std::uint64_t i = 0; i < trials; ++i) {
                const double near = sum(0.0, r);
                const double ring = sum(r, 2.0 * r);
                out.samples.push_back(near + tail_r);
                out.samples_doubled.push_back(near + ring + tail_2r);
                out.value.add(near + tail_r);
            }
            return out;
        };
        auto totals = run_chunks(config, kStreamInterference, fn);
        // Convergence is judged on P{I <= empirical median}.
        std::vector<double> sorted = totals.samples;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
        Moments below;
        for (std::size_t i = 0; i < totals.samples.size(); ++i) {
            const double a = totals.samples[i] <= median ? 1.0 : 0.0;
            const double b2 = totals.samples_doubled[i] <= median ? 1.0 : 0.0;
            below.add(a);
            totals.delta.add(b2 - a);
        }
        SimEstimate est = base;
        fill_common(est, totals, config, r);
        est.truncation_converged = std::abs(totals.delta.mean) <= std::max(below.std_error(), 1e-4);
        est.extras["mean_is_finite"] = 0.0;
        est.extras["far_field_mean"] = tail_r;
        for (double p : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
            if (sorted.empty()) break;
            const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(sorted.size() - 1)));
            est.quantiles.emplace_back(p, sorted[idx]);
        }
        est.samples = std::move(totals.samples);
        return est;
    };
    return with_radius_search(config, sinr_start_radius(s), run);
}

SimEstimate simulate_sinr_throughput(const Scenario& scenario, const PropagationModel& model,
                                     const TrafficModel& traffic, const SimConfig& config) {
    check_sinr_scenario(scenario);
    check_sim_config(config, scenario.r0);
    const Scenario s = scenario;
    const Activity act(traffic);
    const double probe_loss = std::pow(s.r0, 2.0 * s.b);
    SimEstimate base;
    const FarField far = far_field(s, model, traffic, config, base);
    auto run = [&](double r) {
        const double tail_r = far.at(r, s.b);
        const double tail_2r = far.at(2.0 * r, s.b);
        ChunkFn fn = [&, r](std::uint64_t trials, Rng& rng) {
            ChunkResult out;
            std::vector<double> u;
            auto sum = [&](double inner, double outer) {
                field_squared(s.lambda, inner, outer, rng, u);
                double acc = 0.0;
                for (double x : u) {
                    const double d = act.duty(rng);
                    if (d > 0.0) acc += s.p1 * d * sample_channel_gain(model, rng) / std::pow(x, s.b);
                }
                return acc;
            };
            for (std::uint64_t i = 0; i < trials; ++i) {
                double ok = 0.0;
                double delta = 0.0;
                if (act.probe_transmits(rng) && act.duty(rng) == 0.0) {
                    const double signal = s.p0 * sample_channel_gain(model, rng) / probe_loss;
                    const double near = sum(0.0, r);
                    const double ring = sum(r, 2.0 * r);
                    ok = signal >= s.theta_star * (near + tail_r + s.noise) ? 1.0 : 0.0;
                    const double ok2 = signal >= s.theta_star * (near + ring + tail_2r + s.noise) ? 1.0 : 0.0;
                    delta = ok2 - ok;
                }
                out.value.add(ok);
                out.delta.add(delta);
            }
            return out;
        };
        const auto totals = run_chunks(config, kStreamSinr, fn);
        SimEstimate est = base;
        fill_common(est, totals, config, r);
        est.extras["far_field_mean"] = tail_r;
        return est;
    };
    return with_radius_search(config, sinr_start_radius(s), run);
}

}  // namespace lthru
