#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "lthru/errors.hpp"
#include "lthru/stable.hpp"

using namespace lthru;

namespace {

const StableParams kLevy{0.5, 1.0, 1.0};

// Levy law with scale c = gamma^2: the alpha = 1/2, beta = 1 stable law.
double levy_cdf(double gamma, double x) { return x <= 0 ? 0.0 : std::erfc(gamma / std::sqrt(2 * x)); }
double levy_pdf(double gamma, double x) {
    const double c = gamma * gamma;
    return x <= 0 ? 0.0 : std::sqrt(c / (2 * M_PI)) * std::pow(x, -1.5) * std::exp(-c / (2 * x));
}

// Taylor coefficients of exp(-k sqrt(s0 + t)) at t = 0, as derivatives.
std::vector<double> levy_mgf_jet(double k, double s0, int order) {
    std::vector<double> root(order + 1), out(order + 1, 0.0);
    double coef = 1.0;  // binomial(1/2, j)
    for (int j = 0; j <= order; ++j) {
        root[j] = -k * coef * std::pow(s0, 0.5 - j);
        coef *= (0.5 - j) / (j + 1);
    }
    // exp of a power series: e' = e * r'
    out[0] = std::exp(root[0]);
    for (int n = 1; n <= order; ++n) {
        double acc = 0.0;
        for (int j = 1; j <= n; ++j) acc += j * root[j] * out[n - j];
        out[n] = acc / n;
    }
    double fact = 1.0;
    for (int n = 1; n <= order; ++n) {
        fact *= n;
        out[n] *= fact;
    }
    return out;
}

}  // namespace

TEST_CASE("interference parameters") {
    Scenario s;
    s.lambda = 1.0;
    s.b = 2.0;
    s.p1 = 10.0;
    const auto sync = TrafficModel::slotted_sync(0.5);
    auto p = interference_params(s, PropagationModel::path_loss_only(), sync);
    CHECK(p.alpha == 0.5);
    CHECK(p.beta == 1.0);
    const double c_inv = 1.0 / std::sqrt(2.0 / M_PI);
    CHECK(p.gamma == doctest::Approx(M_PI * c_inv * std::sqrt(10.0) * 0.5).epsilon(1e-13));
    p = interference_params(s, PropagationModel::rayleigh(), sync);
    CHECK(p.gamma == doctest::Approx(M_PI * c_inv * std::sqrt(10.0) * 0.5 * std::sqrt(M_PI) / 2).epsilon(1e-13));
    s.lambda = 0.0;
    CHECK(interference_params(s, PropagationModel::rayleigh(), sync).gamma == 0.0);
    s.lambda = 1.0;
    s.b = 1.0;
    CHECK_THROWS_AS(interference_params(s, PropagationModel::rayleigh(), sync), DomainError);
}

TEST_CASE("characteristic function") {
    CHECK(stable_cf(kLevy, 0.0) == std::complex<double>(1.0, 0.0));
    const auto c = stable_cf(kLevy, 1.0);
    CHECK(std::abs(c) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(std::arg(c) == doctest::Approx(1.0).epsilon(1e-14));
    for (double alpha : {0.3, 0.5, 0.8, 1.0, 1.5}) {
        const StableParams p{alpha, 1.0, 2.5};
        for (double w : {-7.0, -0.3, 0.01, 1.0, 12.0}) {
            CHECK(std::abs(stable_cf(p, w)) == doctest::Approx(std::exp(-2.5 * std::pow(std::abs(w), alpha))).epsilon(1e-13));
            CHECK(std::abs(stable_cf(p, -w) - std::conj(stable_cf(p, w))) < 1e-15);
        }
    }
}

TEST_CASE("CF and Laplace transform share one exponent") {
    for (double alpha : {0.25, 0.5, 0.75}) {
        const StableParams p{alpha, 1.0, 1.7};
        const double cosv = std::cos(M_PI * alpha / 2);
        for (double w : {-4.0, -1.0, 0.5, 3.0}) {
            // psi(w) = -gamma (-i w)^alpha / cos(pi alpha / 2), analytic in the upper half plane
            const auto psi = -p.gamma * std::pow(std::complex<double>(0.0, -w), alpha) / cosv;
            CHECK(std::abs(stable_cf(p, w) - std::exp(psi)) < 1e-10 * std::abs(stable_cf(p, w)));
        }
        for (double s : {0.01, 0.5, 2.0, 30.0}) {
            const auto psi = -p.gamma * std::pow(std::complex<double>(s, 0.0), alpha) / cosv;  // w = i s
            CHECK(std::abs(std::log(stable_mgf(p, s)) - psi.real()) < 1e-10);
        }
    }
}

TEST_CASE("Laplace transform") {
    CHECK(stable_mgf(kLevy, 0.0) == 1.0);
    CHECK(stable_mgf(kLevy, 1.0) == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-14));
    CHECK(stable_mgf(kLevy, 1.0) == doctest::Approx(0.2431167).epsilon(1e-7));
    double prev = 1.0;
    for (double s = 0.1; s < 1e4; s *= 1.7) {
        const double v = stable_mgf(kLevy, s);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-50);
    CHECK_THROWS_AS(stable_mgf(kLevy, -1.0), DomainError);
}

TEST_CASE("Laplace transform derivatives") {
    const auto d = stable_mgf_derivatives(kLevy, 1.0, 4);
    CHECK(d[0] == doctest::Approx(stable_mgf(kLevy, 1.0)).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(-std::exp(-std::sqrt(2.0)) / std::sqrt(2.0)).epsilon(1e-14));
    for (double s : {0.05, 0.7, 1.0, 4.0, 25.0}) {
        const auto jet = levy_mgf_jet(std::sqrt(2.0), s, kMaxMgfDerivativeOrder);
        const auto lib = stable_mgf_derivatives(kLevy, s, kMaxMgfDerivativeOrder);
        for (int j = 0; j <= kMaxMgfDerivativeOrder; ++j) CHECK(lib[j] == doctest::Approx(jet[j]).epsilon(1e-10));
    }
    for (double alpha : {0.3, 0.5, 0.8}) {
        const StableParams p{alpha, 1.0, 0.9};
        for (double s : {0.3, 1.0, 3.0}) {
            const auto lib = stable_mgf_derivatives(p, s, 5);
            const double h = 1e-5;
            const auto up = stable_mgf_derivatives(p, s + h, 4);
            const auto dn = stable_mgf_derivatives(p, s - h, 4);
            for (int j = 1; j <= 4; ++j) {
                const double fd = (up[j - 1] - dn[j - 1]) / (2 * h);
                CHECK(std::abs(fd - lib[j]) <= 1e-6 * std::abs(lib[j]));
            }
            for (int j = 0; j <= 5; ++j) CHECK((j % 2 == 0 ? lib[j] > 0 : lib[j] < 0));
        }
    }
    CHECK_THROWS_AS(stable_mgf_derivatives(kLevy, 0.0, 2), DomainError);
    CHECK_THROWS_AS(stable_mgf_derivatives(kLevy, 1.0, kMaxMgfDerivativeOrder + 1), DomainError);
}

TEST_CASE("CDF against the Levy closed form") {
    CHECK(stable_cdf(kLevy, 0.0) == 0.0);
    CHECK(stable_cdf(kLevy, -3.0) == 0.0);
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double x = std::pow(10.0, -2.0 + 6.0 * i / 100.0);
        worst = std::max(worst, std::abs(stable_cdf(kLevy, x) - levy_cdf(1.0, x)));
    }
    CHECK(worst < 1e-8);
    // the median: erfc(z) = 1/2 at z = 0.4769362762
    const double median = 1.0 / (2 * 0.4769362762044699 * 0.4769362762044699);
    CHECK(median == doctest::Approx(2.1981093).epsilon(1e-7));
    CHECK(stable_cdf(kLevy, median) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(stable_quantile(kLevy, 0.5) == doctest::Approx(median).epsilon(1e-9));
    CHECK(stable_cdf(kLevy, 1e12) == doctest::Approx(1.0).epsilon(1e-6));
    for (double g : {0.1, 6.2255807}) {
        const StableParams p{0.5, 1.0, g};
        for (double x : {0.01, 1.0, 9.0, 1000.0}) {
            CHECK(std::abs(stable_cdf(p, x) - levy_cdf(g, x)) < 1e-10);
            CHECK(stable_ccdf(p, x) == doctest::Approx(std::erf(g / std::sqrt(2 * x))).epsilon(1e-9));
        }
    }
}

TEST_CASE("CDF is monotone and obeys the dispersion scaling") {
    for (double alpha : {0.2, 0.5, 0.75, 0.9}) {
        const StableParams unit{alpha, 1.0, 1.0};
        double prev = 0.0;
        for (double x = 1e-3; x < 1e4; x *= 1.3) {
            const double f = stable_cdf(unit, x);
            CHECK(f >= prev);
            CHECK(stable_pdf(unit, x) >= 0.0);
            prev = f;
        }
        for (double g : {0.1, 2.0, 17.0}) {
            const StableParams p{alpha, 1.0, g};
            const double scale = std::pow(g, 1.0 / alpha);
            for (double x : {0.01, 0.5, 3.0, 80.0})
                CHECK(std::abs(stable_cdf(p, x) - stable_cdf(unit, x / scale)) < 1e-8);
        }
    }
}

TEST_CASE("density") {
    CHECK(stable_pdf(kLevy, 1.0) == doctest::Approx(std::exp(-0.5) / std::sqrt(2 * M_PI)).epsilon(1e-9));
    CHECK(stable_pdf(kLevy, 1.0) == doctest::Approx(0.2419707).epsilon(1e-6));
    CHECK(stable_pdf(kLevy, -1.0) == 0.0);
    CHECK(stable_pdf(kLevy, 0.0) == 0.0);
    for (double x = 0.02; x < 500.0; x *= 1.5) CHECK(stable_pdf(kLevy, x) == doctest::Approx(levy_pdf(1.0, x)).epsilon(1e-8));
    for (double alpha : {0.3, 0.5, 0.8}) {
        const StableParams p{alpha, 1.0, 1.0};
        const double top = stable_upper_quantile(p, 1e-9);
        // in u = ln x, from deep in the left tail to the 1e-9 upper quantile
        const double lo = std::log(stable_quantile(p, 1e-12));
        auto r = numerics::integrate_pieces([&](double u) { return stable_pdf(p, std::exp(u)) * std::exp(u); },
                                            {lo, 0.0, std::log(top)});
        CHECK(std::abs(r.value + 1e-9 - 1.0) < 1e-6);
        for (double x : {0.2, 1.0, 4.0, 30.0}) {
            const double h = 1e-4 * x;
            const double fd = (stable_cdf(p, x + h) - stable_cdf(p, x - h)) / (2 * h);
            CHECK(std::abs(fd - stable_pdf(p, x)) < 1e-5);
        }
    }
}

TEST_CASE("far right tail follows the power law") {
    // P{X > x} ~ gamma x^-alpha / (cos(pi alpha / 2) Gamma(1 - alpha))
    for (double alpha : {0.3, 0.5, 0.8}) {
        const StableParams p{alpha, 1.0, 1.0};
        const double k = 1.0 / (std::cos(M_PI * alpha / 2) * std::tgamma(1.0 - alpha));
        for (double x : {1e8, 1e12, 1e20}) {
            INFO("alpha=" << alpha << " x=" << x);
            CHECK(stable_ccdf(p, x) / (k * std::pow(x, -alpha)) == doctest::Approx(1.0).epsilon(2e-2));
            CHECK(stable_pdf(p, x) / (alpha * k * std::pow(x, -alpha - 1)) == doctest::Approx(1.0).epsilon(2e-2));
        }
    }
}

TEST_CASE("quantiles") {
    for (double alpha : {0.4, 0.5, 0.7}) {
        const StableParams p{alpha, 1.0, 3.0};
        for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999})
            CHECK(stable_cdf(p, stable_quantile(p, q)) == doctest::Approx(q).epsilon(1e-8));
        for (double t : {1e-9, 1e-4, 0.2}) CHECK(stable_ccdf(p, stable_upper_quantile(p, t)) == doctest::Approx(t).epsilon(1e-7));
    }
    CHECK_THROWS_AS(stable_quantile(kLevy, 1.0), DomainError);
}

TEST_CASE("unsupported laws") {
    const StableParams sym{1.5, 0.0, 1.0};
    CHECK_THROWS_AS(stable_cdf(sym, 1.0), UnsupportedModeError);
    CHECK_THROWS_AS(stable_pdf({0.5, 0.5, 1.0}, 1.0), UnsupportedModeError);
    CHECK_THROWS_AS(stable_cdf({2.5, 1.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("sampler") {
    Rng rng(3);
    for (int i = 0; i < 10; ++i) CHECK(sample_stable({0.5, 1.0, 0.0}, rng) == 0.0);
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_stable(kLevy, rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = levy_cdf(1.0, xs[i]);
        ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    CHECK(ks < 0.01);
    const StableParams p{0.7, 1.0, 2.0};
    double sum = 0.0, sum2 = 0.0;
    const int m = 1000000;
    for (int i = 0; i < m; ++i) {
        const double v = std::exp(-sample_stable(p, rng));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / m;
    const double se = std::sqrt((sum2 / m - mean * mean) / (m - 1));
    CHECK(std::abs(mean - stable_mgf(p, 1.0)) < 3 * se);
}

TEST_CASE("expectation over the interference law") {
    auto r = expectation_over_interference([](double) { return 1.0; }, kLevy);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-8));
    r = expectation_over_interference([](double x) { return std::exp(-x); }, kLevy);
    CHECK(r.method == ExpectationMethod::quadrature);
    CHECK(r.value == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-8));
    const double median = 1.0 / (2 * 0.4769362762044699 * 0.4769362762044699);
    ExpectationOptions opt;
    opt.breakpoints = {median};
    r = expectation_over_interference([median](double x) { return x <= median ? 1.0 : 0.0; }, kLevy,
                                      ExpectationMethod::quadrature, opt);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-8));
    r = expectation_over_interference([](double x) { return std::exp(-x); }, kLevy, ExpectationMethod::monte_carlo);
    CHECK(r.method == ExpectationMethod::monte_carlo);
    CHECK(std::abs(r.value - std::exp(-std::sqrt(2.0))) < 3 * r.error);
}

TEST_CASE("expectation falls back to Monte Carlo when quadrature cannot converge") {
    ExpectationOptions opt;
    opt.tol = {1e-300, 1e-300, 2};
    opt.mc_samples = 200000;
    const auto r = expectation_over_interference([](double x) { return std::exp(-x); }, kLevy,
                                                 ExpectationMethod::quadrature, opt);
    CHECK(r.fell_back);
    CHECK(r.method == ExpectationMethod::monte_carlo);
    CHECK(std::abs(r.value - std::exp(-std::sqrt(2.0))) < 4 * r.error);
}
