#include "lthru/stable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lthru/errors.hpp"

namespace lthru {

namespace {

using numerics::kPi;

void check_params(const StableParams& p) {
    if (!(p.alpha > 0.0 && p.alpha <= 2.0)) throw DomainError("stable: alpha must lie in (0, 2]");
    if (!(p.beta >= -1.0 && p.beta <= 1.0)) throw DomainError("stable: beta must lie in [-1, 1]");
    if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) throw DomainError("stable: gamma must be finite and nonnegative");
}

void check_skewed(const StableParams& p, const char* who) {
    check_params(p);
    if (!(p.alpha < 1.0) || p.beta != 1.0)
        throw UnsupportedModeError(std::string(who) + ": only 0 < alpha < 1 with beta = 1 is supported");
}

// Standardized law Y with E{exp(-sY)} = exp(-s^alpha); X = k Y with
// k = (gamma / cos(pi alpha / 2))^(1/alpha).
double scale_factor(const StableParams& p) {
    return std::pow(p.gamma / std::cos(0.5 * kPi * p.alpha), 1.0 / p.alpha);
}

// log A(theta) for the Zolotarev kernel
//   A = (sin(a t) / sin t)^(1/(1-a)) * sin((1-a) t) / sin(a t).
// phi = pi - theta is passed separately so sin(theta) keeps full relative
// precision next to pi.
double log_kernel(double alpha, double theta, double phi) {
    const double sin_t = theta < 0.5 * kPi ? std::sin(theta) : std::sin(phi);
    const double s_a = std::sin(alpha * theta);
    const double s_b = std::sin((1.0 - alpha) * theta);
    return (alpha / (1.0 - alpha)) * std::log(s_a) - std::log(sin_t) / (1.0 - alpha) + std::log(s_b);
}

// Limit of log A as theta -> 0.
double log_kernel_at_zero(double alpha) {
    return (alpha / (1.0 - alpha)) * std::log(alpha) + std::log(1.0 - alpha);
}

double log_kernel_safe(double alpha, double theta, double phi) {
    if (theta <= 0.0) return log_kernel_at_zero(alpha);
    if (phi <= 0.0) return std::numeric_limits<double>::infinity();
    return log_kernel(alpha, theta, phi);
}

constexpr numerics::Tolerance kKernelTolerance{1e-14, 1e-12, 2000};

// z A(theta) crosses 1 once, at phi* = pi - theta*; the integrands below
// change over a width comparable to phi* there. Returns breakpoints in phi,
// geometric about phi*, so the adaptive rule sees the transition even when
// phi* is many orders of magnitude below pi.
std::vector<double> phi_breakpoints(double alpha, double log_z) {
    auto t = [&](double phi) { return log_z + log_kernel_safe(alpha, kPi - phi, phi); };
    std::vector<double> pts{0.0};
    if (t(kPi) < 0.0) {
        double lo = std::log(1e-300), hi = std::log(kPi);
        for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
            const double mid = 0.5 * (lo + hi);
            (t(std::exp(mid)) > 0.0 ? lo : hi) = mid;
        }
        const double star = std::exp(0.5 * (lo + hi));
        for (int k = 6; k >= 1; --k) pts.push_back(star * std::pow(0.25, k));
        for (double p = star; p < kPi; p *= 4.0) pts.push_back(p);
    }
    pts.push_back(kPi);
    return pts;
}

// P{Y <= y}.
double std_cdf(double alpha, double y) {
    if (!(y > 0.0)) return 0.0;
    if (std::isinf(y)) return 1.0;
    const double log_z = -(alpha / (1.0 - alpha)) * std::log(y);
    auto f = [&](double phi) {
        const double t = log_z + log_kernel_safe(alpha, kPi - phi, phi);
        return t > 709.0 ? 0.0 : std::exp(-std::exp(t));
    };
    const double v = numerics::integrate_pieces(f, phi_breakpoints(alpha, log_z), kKernelTolerance).value;
    return std::clamp(v / kPi, 0.0, 1.0);
}

// P{Y > y}, integrated in phi = pi - theta so the region next to theta = pi,
// which carries the tail, is resolved accurately.
double std_ccdf(double alpha, double y) {
    if (!(y > 0.0)) return 1.0;
    if (std::isinf(y)) return 0.0;
    const double log_z = -(alpha / (1.0 - alpha)) * std::log(y);
    auto f = [&](double phi) {
        const double t = log_z + log_kernel_safe(alpha, kPi - phi, phi);
        return t > 709.0 ? 1.0 : -std::expm1(-std::exp(t));
    };
    const double v = numerics::integrate_pieces(f, phi_breakpoints(alpha, log_z), kKernelTolerance).value;
    return std::clamp(v / kPi, 0.0, 1.0);
}

// y * g(y) for the standardized density g.
double std_log_density(double alpha, double y) {
    if (!(y > 0.0) || std::isinf(y)) return 0.0;
    const double log_z = -(alpha / (1.0 - alpha)) * std::log(y);
    auto f = [&](double phi) {
        const double t = log_z + log_kernel_safe(alpha, kPi - phi, phi);
        if (t > 709.0) return 0.0;
        const double za = std::exp(t);
        return za * std::exp(-za);
    };
    const double integral = numerics::integrate_pieces(f, phi_breakpoints(alpha, log_z), kKernelTolerance).value;
    return std::max(0.0, alpha / ((1.0 - alpha) * kPi) * integral);
}

// Bracket ln y so that cmp(ln y) changes sign, then bisect.
template <typename F>
double solve_log(F&& residual) {
    double lo = -1.0;
    double hi = 1.0;
    for (int i = 0; i < 200 && residual(lo) > 0.0; ++i) lo *= 2.0;
    for (int i = 0; i < 200 && residual(hi) < 0.0; ++i) hi *= 2.0;
    return numerics::bisect(residual, lo, hi, 1e-13);
}

}  // namespace

StableParams interference_params(const Scenario& scenario, const PropagationModel& model,
                                 const TrafficModel& traffic, DutyCycleMode mode) {
    if (!(scenario.b > 1.0))
        throw DomainError("interference_params: b must exceed 1 for the aggregate interference to be stable");
    if (!(scenario.lambda >= 0.0)) throw DomainError("interference_params: lambda must be nonnegative");
    if (!(scenario.p1 > 0.0)) throw DomainError("interference_params: p1 must be positive");
    const double x = 1.0 / scenario.b;
    StableParams p;
    p.alpha = x;
    p.beta = 1.0;
    p.gamma = kPi * scenario.lambda / numerics::stable_prefactor_c(x) * std::pow(scenario.p1, x) *
              duty_cycle_moment(traffic, scenario.b, mode) * channel_moment(model, scenario.b);
    return p;
}

std::complex<double> stable_cf(const StableParams& params, double w) {
    check_params(params);
    if (w == 0.0) return {1.0, 0.0};
    const double aw = std::abs(w);
    const double sgn = w > 0.0 ? 1.0 : -1.0;
    double skew;
    if (params.alpha == 1.0)
        skew = -params.beta * sgn * (2.0 / kPi) * std::log(aw);
    else
        skew = params.beta * sgn * std::tan(0.5 * kPi * params.alpha);
    const double mag = params.gamma * std::pow(aw, params.alpha);
    return std::exp(std::complex<double>(-mag, mag * skew));
}

double stable_mgf(const StableParams& params, double s) {
    check_params(params);
    if (!(s >= 0.0)) throw DomainError("stable_mgf: s must be nonnegative");
    if (s == 0.0 || params.gamma == 0.0) return 1.0;
    if (params.alpha == 1.0) return std::exp((2.0 / kPi) * params.gamma * s * std::log(s));
    return std::exp(-params.gamma * std::pow(s, params.alpha) / std::cos(0.5 * kPi * params.alpha));
}

std::vector<double> stable_mgf_derivatives(const StableParams& params, double s, int max_order) {
    check_params(params);
    if (!(s > 0.0)) throw DomainError("stable_mgf_derivatives: s must be positive");
    if (max_order < 0 || max_order > kMaxMgfDerivativeOrder)
        throw DomainError("stable_mgf_derivatives: order must lie in [0, " +
                          std::to_string(kMaxMgfDerivativeOrder) + "]");
    const double a = params.alpha;
    // g^(n)(s) for n = 1..max_order, where the MGF is exp(g).
    std::vector<double> g(static_cast<std::size_t>(max_order) + 1, 0.0);
    if (a == 1.0) {
        const double c = (2.0 / kPi) * params.gamma;
        if (max_order >= 1) g[1] = c * (std::log(s) + 1.0);
        double fall = 1.0;  // (n-2)!
        for (int n = 2; n <= max_order; ++n) {
            if (n > 2) fall *= (n - 2);
            g[n] = c * ((n % 2 == 0) ? 1.0 : -1.0) * fall / std::pow(s, n - 1);
        }
    } else {
        const double c = params.gamma / std::cos(0.5 * kPi * a);
        double falling = 1.0;
        for (int n = 1; n <= max_order; ++n) {
            falling *= (a - (n - 1));
            g[n] = -c * falling * std::pow(s, a - n);
        }
    }
    std::vector<double> f(static_cast<std::size_t>(max_order) + 1, 0.0);
    f[0] = stable_mgf(params, s);
    for (int n = 1; n <= max_order; ++n) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += numerics::binomial(n - 1, k) * g[n - k] * f[k];
        f[n] = acc;
    }
    return f;
}

double stable_cdf(const StableParams& params, double x) {
    check_skewed(params, "stable_cdf");
    if (!(x > 0.0)) return params.gamma == 0.0 && x == 0.0 ? 1.0 : 0.0;
    if (params.gamma == 0.0) return 1.0;
    return std_cdf(params.alpha, x / scale_factor(params));
}

double stable_ccdf(const StableParams& params, double x) {
    check_skewed(params, "stable_ccdf");
    if (!(x > 0.0)) return params.gamma == 0.0 && x == 0.0 ? 0.0 : 1.0;
    if (params.gamma == 0.0) return 0.0;
    return std_ccdf(params.alpha, x / scale_factor(params));
}

double stable_pdf(const StableParams& params, double x) {
    check_skewed(params, "stable_pdf");
    if (!(x > 0.0) || params.gamma == 0.0) return 0.0;
    const double k = scale_factor(params);
    const double y = x / k;
    return std_log_density(params.alpha, y) / x;
}

double stable_quantile(const StableParams& params, double p) {
    check_skewed(params, "stable_quantile");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("stable_quantile: p must lie in (0, 1)");
    if (p > 0.5) return stable_upper_quantile(params, 1.0 - p);
    if (params.gamma == 0.0) return 0.0;
    const double a = params.alpha;
    const double u = solve_log([&](double ln_y) { return std_cdf(a, std::exp(ln_y)) - p; });
    return scale_factor(params) * std::exp(u);
}

double stable_upper_quantile(const StableParams& params, double tail) {
    check_skewed(params, "stable_upper_quantile");
    if (!(tail > 0.0 && tail < 1.0)) throw DomainError("stable_upper_quantile: tail must lie in (0, 1)");
    if (params.gamma == 0.0) return 0.0;
    const double a = params.alpha;
    const double u = solve_log([&](double ln_y) { return tail - std_ccdf(a, std::exp(ln_y)); });
    return scale_factor(params) * std::exp(u);
}

double sample_stable(const StableParams& params, Rng& rng) {
    check_skewed(params, "sample_stable");
    if (params.gamma == 0.0) return 0.0;
    const double a = params.alpha;
    std::uniform_real_distribution<double> unif(0.0, kPi);
    std::exponential_distribution<double> expo(1.0);
    double theta = 0.0;
    while (theta <= 0.0) theta = unif(rng);
    double w = 0.0;
    while (w <= 0.0) w = expo(rng);
    // Chambers-Mallows-Stuck with beta = 1, written in Kanter's form.
    const double y = std::sin(a * theta) / std::pow(std::sin(theta), 1.0 / a) *
                     std::pow(std::sin((1.0 - a) * theta) / w, (1.0 - a) / a);
    return scale_factor(params) * y;
}

ExpectationResult expectation_over_interference(const std::function<double(double)>& f,
                                                const StableParams& params, ExpectationMethod method,
                                                const ExpectationOptions& options) {
    check_skewed(params, "expectation_over_interference");
    ExpectationResult out;
    out.method = method;
    if (params.gamma == 0.0) {
        out.value = f(0.0);
        return out;
    }

    auto monte_carlo = [&]() {
        Rng rng(options.mc_seed);
        double mean = 0.0;
        double m2 = 0.0;
        std::uint64_t n = 0;
        for (; n < options.mc_samples; ++n) {
            const double v = f(sample_stable(params, rng));
            const double d = v - mean;
            mean += d / static_cast<double>(n + 1);
            m2 += d * (v - mean);
        }
        ExpectationResult r;
        r.method = ExpectationMethod::monte_carlo;
        r.value = mean;
        r.error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        return r;
    };

    if (method == ExpectationMethod::monte_carlo) return monte_carlo();

    // Integrate in u = ln(x / k): E{f} = int f(k e^u) y g(y) du with y = e^u.
    const double a = params.alpha;
    const double k = scale_factor(params);
    const double u_hi = std::log(stable_upper_quantile(params, options.upper_tail) / k);
    const double u_lo = solve_log([&](double ln_y) { return std_cdf(a, std::exp(ln_y)) - 1e-16; });
    std::vector<double> points{std::min(u_lo, u_hi - 1.0)};
    std::vector<double> breaks;
    for (double x : options.breakpoints)
        if (x > 0.0 && std::isfinite(x)) breaks.push_back(std::log(x / k));
    breaks.push_back(0.0);
    std::sort(breaks.begin(), breaks.end());
    for (double u : breaks)
        if (u > points.back() && u < u_hi) points.push_back(u);
    points.push_back(u_hi);

    auto integrand = [&](double u) {
        const double y = std::exp(u);
        return f(k * y) * std_log_density(a, y);
    };
    const auto res = numerics::integrate_pieces(integrand, points, options.tol);
    if (!res.converged || !std::isfinite(res.value)) {
        auto r = monte_carlo();
        r.fell_back = true;
        return r;
    }
    out.value = res.value;
    out.error = res.abs_error;
    return out;
}

}  // namespace lthru
