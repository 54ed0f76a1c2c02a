#include <cmath>
#include <random>

#include "doctest.h"
#include "lthru/errors.hpp"
#include "lthru/sinr.hpp"

using namespace lthru;

namespace {

Scenario fig8() {
    Scenario s;
    s.lambda = 1.0;
    s.b = 2.0;
    s.p0 = 10.0;
    s.p1 = 10.0;
    s.r0 = 1.0;
    s.theta_star = 1.0;
    s.noise = 1.0;
    return s;
}

const TrafficModel kSync = TrafficModel::slotted_sync(0.5);

double success(const Scenario& s, const PropagationModel& m, Strategy st = Strategy::automatic) {
    SinrOptions o;
    o.strategy = st;
    return sinr_success_prob(s, m, kSync, o).value;
}

}  // namespace

TEST_CASE("strategy names") {
    CHECK(parse_strategy("auto") == Strategy::automatic);
    CHECK(parse_strategy("closed_form") == Strategy::closed_form);
    CHECK(parse_strategy("generic") == Strategy::generic);
    CHECK(to_string(Strategy::automatic) == "auto");
    CHECK_THROWS_AS(parse_strategy("fast"), DomainError);
}

TEST_CASE("Rayleigh operating point") {
    const auto s = fig8();
    const auto r = sinr_success_prob(s, PropagationModel::rayleigh(), kSync);
    CHECK(r.method == SinrMethod::rayleigh);
    // e^{-a N} exp(-gamma a^{1/2} / cos(pi/4)) with a = 0.1, gamma = pi^{3/2} sqrt(10) / 2 * sqrt(pi/2) / 2
    const double gamma = M_PI * std::sqrt(M_PI / 2) * std::sqrt(10.0) * 0.5 * std::sqrt(M_PI) / 2;
    const double expected = std::exp(-0.1) * std::exp(-gamma * std::sqrt(0.1) * std::sqrt(2.0));
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(std::exp(-0.1) * std::exp(-M_PI * M_PI / 4)).epsilon(1e-12));
    const auto t = sinr_throughput(s, PropagationModel::rayleigh(), kSync);
    CHECK(t.throughput == doctest::Approx(0.25 * expected).epsilon(1e-12));
    CHECK(t.throughput == doctest::Approx(t.p_t * t.p_s * t.success_prob).epsilon(1e-12));
    CHECK(sinr_throughput(s, PropagationModel::rayleigh(), TrafficModel::slotted_sync(0.0)).throughput == 0.0);
    CHECK(sinr_throughput(s, PropagationModel::rayleigh(), TrafficModel::slotted_async(0.5)).throughput < t.throughput);
}

TEST_CASE("path loss reduces to the interference cdf") {
    const auto s = fig8();
    const auto r = sinr_success_prob(s, PropagationModel::path_loss_only(), kSync);
    CHECK(r.method == SinrMethod::path_loss_cdf);
    const double gamma = M_PI * std::sqrt(M_PI / 2) * std::sqrt(10.0) * 0.5;
    CHECK(std::abs(r.value - std::erfc(gamma / std::sqrt(18.0))) < 1e-10);
    auto loud = s;
    loud.noise = 11.0;  // 1/a - N < 0: the signal cannot beat the noise alone
    CHECK(sinr_success_prob(loud, PropagationModel::path_loss_only(), kSync).value == 0.0);
    CHECK(sinr_success_prob(loud, PropagationModel::path_loss_only(), kSync, {Strategy::generic}).value == 0.0);
}

TEST_CASE("limits") {
    auto s = fig8();
    s.noise = 0.0;
    s.theta_star = 1e-14;
    for (const auto& m : {PropagationModel::path_loss_only(), PropagationModel::rayleigh(), PropagationModel::nakagami(3)})
        CHECK(success(s, m) == doctest::Approx(1.0).epsilon(1e-5));
    s = fig8();
    s.theta_star = 1e12;
    CHECK(success(s, PropagationModel::rayleigh()) < 1e-12);
    s = fig8();
    s.noise = 1e9;
    CHECK(success(s, PropagationModel::nakagami(2)) < 1e-12);
    s = fig8();
    s.lambda = 0.0;
    CHECK(success(s, PropagationModel::rayleigh()) == doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
    s = fig8();
    s.b = 1.0;
    CHECK_THROWS_AS(success(s, PropagationModel::rayleigh()), DomainError);
}

TEST_CASE("closed forms agree with the generic numerics") {
    const double sigmas[] = {sigma_from_db(6.0), sigma_from_db(10.0)};
    for (double theta : {0.5, 2.0})
        for (double lambda : {0.2, 1.0})
            for (double b : {1.5, 2.0, 3.0}) {
                auto s = fig8();
                s.theta_star = theta;
                s.lambda = lambda;
                s.b = b;
                std::vector<PropagationModel> models{PropagationModel::path_loss_only(), PropagationModel::rayleigh(),
                                                     PropagationModel::nakagami(2), PropagationModel::nakagami(4)};
                for (double sg : sigmas) {
                    models.push_back(PropagationModel::log_normal_shadowing(sg));
                    models.push_back(PropagationModel::shadowing_and_nakagami(sg, 1));
                    models.push_back(PropagationModel::shadowing_and_nakagami(sg, 2));
                }
                for (const auto& m : models) {
                    INFO(m.name() << " theta=" << theta << " lambda=" << lambda << " b=" << b);
                    CHECK(std::abs(success(s, m, Strategy::closed_form) - success(s, m, Strategy::generic)) < 1e-4);
                }
            }
}

TEST_CASE("integer-m series at m = 1 reproduces the Rayleigh forms") {
    SinrOptions series;
    series.rayleigh_as_series = true;
    for (double theta : {0.3, 1.0, 4.0}) {
        auto s = fig8();
        s.theta_star = theta;
        const auto ray = sinr_success_prob(s, PropagationModel::rayleigh(), kSync);
        const auto ser = sinr_success_prob(s, PropagationModel::rayleigh(), kSync, series);
        CHECK(ray.method == SinrMethod::rayleigh);
        CHECK(ser.method == SinrMethod::nakagami_series);
        CHECK(std::abs(ray.value - ser.value) < 1e-10);
        const auto comb = PropagationModel::shadowing_and_nakagami(sigma_from_db(8.0), 1);
        const auto cr = sinr_success_prob(s, comb, kSync);
        const auto cs = sinr_success_prob(s, comb, kSync, series);
        CHECK(cr.method == SinrMethod::combined_rayleigh);
        CHECK(cs.method == SinrMethod::combined_series);
        CHECK(std::abs(cr.value - cs.value) < 1e-10);
    }
}

TEST_CASE("shadowing: outer-integral form and Q form agree") {
    SinrOptions q;
    q.shadowing_q_form = true;
    for (double sdb : {4.0, 8.0, 12.0})
        for (double theta : {0.5, 1.0, 3.0}) {
            auto s = fig8();
            s.theta_star = theta;
            const auto m = PropagationModel::log_normal_shadowing(sigma_from_db(sdb));
            const auto f = sinr_success_prob(s, m, kSync);
            const auto g = sinr_success_prob(s, m, kSync, q);
            CHECK(f.method == SinrMethod::shadowing_cdf);
            CHECK(g.method == SinrMethod::generic_quadrature);
            CHECK(std::abs(f.value - g.value) < 1e-5);
        }
}

TEST_CASE("Hermite outer rule stays close to the adaptive outer integral") {
    SinrOptions gh;
    gh.outer_gh_order = 40;
    const auto s = fig8();
    for (const auto& m : {PropagationModel::log_normal_shadowing(sigma_from_db(6.0)),
                          PropagationModel::shadowing_and_nakagami(sigma_from_db(6.0), 2)})
        CHECK(std::abs(sinr_success_prob(s, m, kSync, gh).value - sinr_success_prob(s, m, kSync).value) < 1e-4);
}

TEST_CASE("non-integer m and large m take the generic path") {
    const auto s = fig8();
    auto r = sinr_success_prob(s, PropagationModel::nakagami(2.5), kSync);
    CHECK(r.method == SinrMethod::generic_non_integer_m);
    const double lo = success(s, PropagationModel::nakagami(2));
    const double hi = success(s, PropagationModel::nakagami(3));
    CHECK(r.value > std::min(lo, hi));
    CHECK(r.value < std::max(lo, hi));
    r = sinr_success_prob(s, PropagationModel::nakagami(20), kSync);
    CHECK(r.method == SinrMethod::generic_non_integer_m);
    CHECK(sinr_success_prob(s, PropagationModel::nakagami(17), kSync).method == SinrMethod::nakagami_series);
}

TEST_CASE("custom channel uses Monte Carlo over the probe gain") {
    const auto s = fig8();
    const auto ray = PropagationModel::custom([](double x) { return std::tgamma(1.0 + x); },
                                              [](Rng& r) { return std::exponential_distribution<double>(1.0)(r); });
    const auto r = sinr_success_prob(s, ray, kSync);
    CHECK(r.method == SinrMethod::generic_monte_carlo);
    CHECK(std::abs(r.value - success(s, PropagationModel::rayleigh())) < 4 * r.error);
}

TEST_CASE("success probability is monotone in each parameter") {
    const auto models = {PropagationModel::path_loss_only(), PropagationModel::rayleigh(),
                         PropagationModel::nakagami(3), PropagationModel::log_normal_shadowing(sigma_from_db(8.0))};
    for (const auto& m : models) {
        INFO(m.name());
        double prev = 2.0;
        for (double v : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
            auto s = fig8();
            s.lambda = v;
            const double p = success(s, m);
            CHECK(p <= prev + 1e-12);
            prev = p;
        }
        prev = 2.0;
        for (double v : {0.1, 1.0, 3.0, 10.0, 100.0}) {
            auto s = fig8();
            s.p1 = v;
            const double p = success(s, m);
            CHECK(p <= prev + 1e-12);
            prev = p;
        }
        prev = 2.0;
        for (double v : {0.01, 0.1, 0.5, 1.0, 4.0}) {
            auto s = fig8();
            s.theta_star = v;
            const double p = success(s, m);
            CHECK(p <= prev + 1e-12);
            prev = p;
        }
        prev = 2.0;
        for (double v : {0.0, 0.5, 1.0, 3.0, 9.0}) {
            auto s = fig8();
            s.noise = v;
            const double p = success(s, m);
            CHECK(p <= prev + 1e-12);
            prev = p;
        }
        prev = -1.0;
        for (double v : {1.0, 5.0, 10.0, 50.0, 500.0}) {
            auto s = fig8();
            s.p0 = v;
            const double p = success(s, m);
            CHECK(p >= prev - 1e-12);
            prev = p;
        }
    }
}

TEST_CASE("noise-free path loss depends only on the normalized margin") {
    auto s = fig8();
    s.noise = 0.0;
    const auto pl = PropagationModel::path_loss_only();
    const double base = success(s, pl);
    auto t = s;
    t.p0 *= 3.0;
    t.p1 *= 3.0;
    CHECK(success(t, pl) == doctest::Approx(base).epsilon(1e-9));
    t = s;
    t.theta_star *= 5.0;
    t.p0 *= 5.0;
    CHECK(success(t, pl) == doctest::Approx(base).epsilon(1e-9));
    t = s;
    t.r0 *= 1.5;
    t.p0 *= std::pow(1.5, 2 * s.b);
    CHECK(success(t, pl) == doctest::Approx(base).epsilon(1e-9));
    t = s;
    t.lambda *= 2.0;
    t.p0 *= std::pow(2.0, s.b);
    CHECK(success(t, pl) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("sensitivity sweeps") {
    const auto s = fig8();
    const auto m = PropagationModel::nakagami(2);
    auto same = success_prob_sensitivity(s, m, kSync, SensitivityParam::lambda, {0.7, 0.7});
    CHECK(same[0].success_prob == same[1].success_prob);
    const std::vector<double> grid{0.1, 0.3, 1.0, 2.0, 4.0};
    const auto lam = success_prob_sensitivity(s, m, kSync, SensitivityParam::lambda, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto direct = s;
        direct.lambda = grid[i];
        CHECK(lam[i].success_prob == doctest::Approx(success(direct, m)).epsilon(1e-10));
        if (i > 0) CHECK(lam[i].success_prob <= lam[i - 1].success_prob);
    }
    // doubling lambda scales gamma as multiplying P1 by 2^b does
    auto two_lambda = success_prob_sensitivity(s, m, kSync, SensitivityParam::lambda, {2.0});
    auto p1_scaled = success_prob_sensitivity(s, m, kSync, SensitivityParam::p1, {s.p1 * std::pow(2.0, s.b)});
    CHECK(two_lambda[0].success_prob == doctest::Approx(p1_scaled[0].success_prob).epsilon(1e-12));
    CHECK_THROWS_AS(success_prob_sensitivity(s, m, kSync, SensitivityParam::p1, {0.0}), DomainError);
}
