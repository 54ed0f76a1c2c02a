#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace lthru::numerics {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Abscissas and weights of an interpolatory rule. Hermite rules integrate
/// against exp(-x^2) on the real line.
struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;  // positive
    int order = 0;
};

/// Tolerances for adaptive integration. Every operation that integrates
/// numerically takes one of these, defaulting to the constants below.
struct Tolerance {
    double abs = 1e-12;
    double rel = 1e-10;
    int max_intervals = 4000;
};

inline constexpr Tolerance kDefaultTolerance{};
inline constexpr Tolerance kMomentIntegralTolerance{1e-14, 1e-12, 4000};

struct IntegrationResult {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = false;
    int evaluations = 0;
};

double gamma_fn(double x);

/// gamma_inc(a, x) = int_0^x t^(a-1) e^-t dt.
double lower_incomplete_gamma(double a, double x);

/// P(a, x) = gamma_inc(a, x) / Gamma(a).
double regularized_gamma_p(double a, double x);

/// Q(a, x) = 1 - P(a, x), computed without cancellation.
double regularized_gamma_q(double a, double x);

/// Standard normal upper tail P{G > x}.
double gaussian_q(double x);

/// Inverse of gaussian_q on (0, 1).
double gaussian_q_inverse(double p);

/// Physicists' Gauss-Hermite rule, 1 <= order <= 64.
QuadratureRule gauss_hermite_rule(int order);

/// Cached variant for inner loops; the table is built once and never mutated.
const QuadratureRule& gauss_hermite_cached(int order);

/// C_x = (1 - x) / (Gamma(2 - x) cos(pi x / 2)) for x != 1, and 2/pi at x = 1.
double stable_prefactor_c(double x);

/// I(x, y) = int_0^1 (1 - t)^x e^(-y t) dt.
double truncated_exp_moment_integral(double x, double y,
                                     const Tolerance& tol = kMomentIntegralTolerance);

double binomial(int n, int k);
double factorial(int n);

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    return {a, b, resk * half, std::abs((resk - resg) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]. The interval
/// with the largest error estimate is bisected until the summed estimate
/// falls below max(tol.abs, tol.rel * |value|).
template <typename F>
IntegrationResult integrate(F&& f, double a, double b, const Tolerance& tol = kDefaultTolerance) {
    IntegrationResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::Segment> heap;
    auto first = detail::kronrod15(f, a, b);
    heap.push(first);
    double value = first.value;
    double error = first.error;
    int evals = 15;
    int intervals = 1;
    while (error > std::max(tol.abs, tol.rel * std::abs(value)) && intervals < tol.max_intervals) {
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // interval below resolution
        heap.pop();
        auto left = detail::kronrod15(f, worst.a, mid);
        auto right = detail::kronrod15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evals += 30;
        ++intervals;
    }
    // Re-sum to shed the drift of the running totals.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = sign * value;
    out.abs_error = error;
    out.converged = error <= std::max(tol.abs, tol.rel * std::abs(value));
    out.evaluations = evals;
    return out;
}

/// Integrate over consecutive pieces [p0, p1], [p1, p2], ...; use when f has
/// known kinks or jumps at the interior points.
template <typename F>
IntegrationResult integrate_pieces(F&& f, const std::vector<double>& points,
                                   const Tolerance& tol = kDefaultTolerance) {
    IntegrationResult total;
    total.converged = true;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        auto piece = integrate(f, points[i], points[i + 1], tol);
        total.value += piece.value;
        total.abs_error += piece.abs_error;
        total.evaluations += piece.evaluations;
        total.converged = total.converged && piece.converged;
    }
    return total;
}

/// E{f(G)} for G standard normal, integrated adaptively on [-12, 12] with
/// optional interior breakpoints.
template <typename F>
IntegrationResult normal_expectation(F&& f, std::vector<double> breaks = {},
                                     const Tolerance& tol = kDefaultTolerance) {
    constexpr double kLimit = 12.0;
    std::vector<double> points{-kLimit};
    std::sort(breaks.begin(), breaks.end());
    for (double p : breaks)
        if (p > -kLimit && p < kLimit) points.push_back(p);
    points.push_back(kLimit);
    constexpr double kNorm = 0.39894228040143267794;  // 1/sqrt(2 pi)
    auto weighted = [&f](double g) { return f(g) * kNorm * std::exp(-0.5 * g * g); };
    return integrate_pieces(weighted, points, tol);
}

/// E{f(G)} for G standard normal by a Hermite rule: (1/sqrt(pi)) sum w_n f(sqrt(2) x_n).
template <typename F>
double hermite_expectation(F&& f, int order) {
    const auto& rule = gauss_hermite_cached(order);
    double acc = 0.0;
    for (std::size_t n = 0; n < rule.nodes.size(); ++n)
        acc += rule.weights[n] * f(kSqrt2 * rule.nodes[n]);
    return acc / kSqrtPi;
}

/// Root of a monotone function bracketed by [lo, hi], by bisection.
template <typename F>
double bisect(F&& f, double lo, double hi, double x_tol, int max_iter = 200) {
    double flo = f(lo);
    for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace lthru::numerics
