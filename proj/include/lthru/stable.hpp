#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "lthru/model.hpp"
#include "lthru/numerics.hpp"

namespace lthru {

/// Stable law S(alpha, beta, gamma) with characteristic function
///   phi(w) = exp(-gamma |w|^alpha (1 - j beta sign(w) tan(pi alpha / 2)))
/// for alpha != 1. gamma is the dispersion; the conventional scale is
/// gamma^(1/alpha). The aggregate interference always has beta = 1 and
/// alpha = 1/b < 1, so its support is [0, inf).
struct StableParams {
    double alpha = 0.5;
    double beta = 1.0;
    double gamma = 1.0;
};

/// Law of the aggregate interference for the given network.
StableParams interference_params(const Scenario& scenario, const PropagationModel& model,
                                 const TrafficModel& traffic, DutyCycleMode mode = DutyCycleMode::exact);

std::complex<double> stable_cf(const StableParams& params, double w);

/// Laplace transform E{e^(-sX)} for beta = 1, s >= 0.
double stable_mgf(const StableParams& params, double s);

/// d^j/ds^j E{e^(-sX)} for j = 0..max_order at s > 0.
std::vector<double> stable_mgf_derivatives(const StableParams& params, double s, int max_order);

inline constexpr int kMaxMgfDerivativeOrder = 16;

// The functions below require 0 < alpha < 1 and beta = 1.
double stable_cdf(const StableParams& params, double x);
/// 1 - F(x), accurate deep into the right tail.
double stable_ccdf(const StableParams& params, double x);
double stable_pdf(const StableParams& params, double x);
/// F^-1(p) for p in (0, 1).
double stable_quantile(const StableParams& params, double p);
/// x with 1 - F(x) = tail, for tail in (0, 1).
double stable_upper_quantile(const StableParams& params, double tail);
double sample_stable(const StableParams& params, Rng& rng);

enum class ExpectationMethod { quadrature, monte_carlo };

struct ExpectationOptions {
    numerics::Tolerance tol{1e-10, 1e-9, 4000};
    std::vector<double> breakpoints;  // points (in x) where the integrand jumps or kinks
    std::uint64_t mc_samples = 1000000;
    std::uint64_t mc_seed = 0x73746162u;
    double upper_tail = 1e-9;  // quadrature stops at F^-1(1 - upper_tail)
};

struct ExpectationResult {
    double value = 0.0;
    double error = 0.0;  // quadrature error bound, or standard error for Monte Carlo
    ExpectationMethod method = ExpectationMethod::quadrature;
    bool fell_back = false;  // quadrature failed to converge; Monte Carlo used instead
};

/// E{f(I)} for I ~ params, f bounded on [0, inf).
ExpectationResult expectation_over_interference(const std::function<double(double)>& f,
                                                const StableParams& params,
                                                ExpectationMethod method = ExpectationMethod::quadrature,
                                                const ExpectationOptions& options = {});

}  // namespace lthru
