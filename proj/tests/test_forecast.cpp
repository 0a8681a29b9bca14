#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "snnot/errors.hpp"
#include "snnot/forecast.hpp"

using namespace snnot;

namespace {

TimeSeries logistic_series(int n, const LogisticParams& q) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int t = 1; t <= n; ++t) v[t - 1] = q.L / (1.0 + std::exp(-q.alpha * (static_cast<double>(t) / n - q.t0)));
    return TimeSeries(v);
}

}  // namespace

TEST_CASE("logistic exact recovery") {
    const LogisticParams truth{12.0, 30.0, 0.8};
    const auto y = logistic_series(100, truth);
    const auto fit = fit_extrapolant(y, 61, Family::logistic);
    REQUIRE(fit.converged);
    CHECK(oracle::rel_err(fit.parameters[0], 12.0) < 1e-4);
    CHECK(oracle::rel_err(fit.parameters[1], 30.0) < 1e-4);
    CHECK(oracle::rel_err(fit.parameters[2], 0.8) < 1e-4);
    CHECK(fit.window_start == 61);
    CHECK(fit.window_end == 100);
}

TEST_CASE("logistic recovery from the logit fallback start") {
    // Window entirely above the half-max, so no crossing exists.
    const LogisticParams truth{12.0, 10.0, 0.3};
    const auto y = logistic_series(100, truth);
    const auto init = logistic_initial_guess(y, 51);
    CHECK(init.alpha > 0.0);
    const auto fit = fit_extrapolant(y, 51, Family::logistic);
    CHECK(fit.converged);
    CHECK(fit.sse < 1e-12);
}

TEST_CASE("analytic logistic gradient matches central differences") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> L(5, 15), a(5, 40), t0(0.5, 1.0), x(0.5, 1.1);
    const double step = 1e-6;
    for (int rep = 0; rep < 10; ++rep) {
        const LogisticParams q{L(gen), a(gen), t0(gen)};
        const double at = x(gen);
        const auto g = logistic_gradient(q, at);
        for (int j = 0; j < 3; ++j) {
            LogisticParams up = q, dn = q;
            double* pu = j == 0 ? &up.L : j == 1 ? &up.alpha : &up.t0;
            double* pd = j == 0 ? &dn.L : j == 1 ? &dn.alpha : &dn.t0;
            const double hj = step * std::max(1.0, std::abs(*pu));
            *pu += hj;
            *pd -= hj;
            const double fd = (logistic_value(up, at) - logistic_value(dn, at)) / (2 * hj);
            CHECK(std::abs(g[j] - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3));
        }
    }
}

TEST_CASE("linear and quadratic fits match direct least squares") {
    const TimeSeries line(std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5});
    const auto lin = fit_extrapolant(line, 4, Family::linear);
    const auto ols = ols_fit(line, 4, 10, 1);
    CHECK(lin.parameters[0] == ols[0]);
    CHECK(lin.parameters[1] == ols[1]);
    CHECK(lin.sse < 1e-24);

    const std::vector<double> pts{2.0, 2.9, 3.1, 3.8, 3.9, 4.4};
    std::vector<double> v(14, 0.0);
    v.insert(v.end(), pts.begin(), pts.end());
    const TimeSeries y(v);
    const auto quad = fit_extrapolant(y, 15, Family::quadratic);
    std::vector<long double> xs, ys;
    for (int t = 15; t <= 20; ++t) {
        xs.push_back(t / 20.0L);
        ys.push_back(y.at(t));
    }
    const auto want = oracle::poly_fit(xs, ys, 2);
    for (int j = 0; j < 3; ++j) CHECK(oracle::rel_err(quad.parameters[j], want[j]) < 1e-8);
}

TEST_CASE("forecast arithmetic") {
    ExtrapolantFit lin;
    lin.family = Family::linear;
    lin.parameters = {0.0, 1.0};
    const auto r = forecast_k(lin, 100, 5);
    CHECK(r.y_hat == doctest::Approx(1.05).epsilon(1e-15));
    CHECK(r.count_hat == std::exp(r.y_hat));
    CHECK(r.count_rounded == 3.0);

    ExtrapolantFit lg;
    lg.family = Family::logistic;
    lg.parameters = {9.0, 20.0, 0.9};
    CHECK(forecast_k(lg, 100, 100000).count_hat == doctest::Approx(std::exp(9.0)).epsilon(1e-9));
    double prev = 0.0;
    for (int k = 1; k <= 30; ++k) {
        const double c = forecast_k(lg, 100, k).count_hat;
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS(forecast_k(lin, 100, -1), ArgumentError);
}

TEST_CASE("zero horizon reproduces the fitted value at n") {
    const auto e = oracle::iid_normal(40, 22, 0.1);
    std::vector<double> v(40);
    for (int t = 1; t <= 40; ++t) v[t - 1] = 2 + 0.1 * t - 0.001 * t * t + e[t - 1];
    const TimeSeries y(v);
    for (auto fam : {Family::linear, Family::quadratic}) {
        const auto fit = fit_extrapolant(y, 11, fam);
        const auto c = ols_fit(y, 11, 40, fam == Family::linear ? 1 : 2);
        CHECK(std::abs(forecast_k(fit, 40, 0).y_hat - c.evaluate(1.0)) < 1e-10);
    }
}

TEST_CASE("rounding and signed relative error") {
    ExtrapolantFit lin;
    lin.family = Family::linear;
    lin.parameters = {std::log(100.6), 0.0};
    auto r = forecast_k(lin, 10, 1);
    CHECK(r.count_rounded == 101.0);
    attach_truth(r, 110.0);
    CHECK(*r.relative_error == doctest::Approx(-9.0 / 110.0));
    CHECK_THROWS_AS(attach_truth(r, 0.0), ArgumentError);
}

TEST_CASE("window size preconditions and non-convergence") {
    const TimeSeries y(std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(fit_extrapolant(y, 5, Family::linear), DegenerateWindowError);
    CHECK_NOTHROW(fit_extrapolant(y, 4, Family::linear));
    CHECK_THROWS_AS(fit_extrapolant(y, 4, Family::quadratic), DegenerateWindowError);
    CHECK_THROWS_AS(fit_extrapolant(y, 3, Family::logistic), DegenerateWindowError);

    const auto lg = logistic_series(100, {12.0, 30.0, 0.8});
    const auto init = logistic_initial_guess(lg, 61);
    LogisticOptions one;
    one.max_iterations = 1;
    const auto fit = fit_logistic_from(lg, 61, init, one);
    CHECK_FALSE(fit.converged);
    const auto start = fit_logistic_from(lg, 61, init, LogisticOptions{0, 1e-10, 0, 1});
    CHECK(fit.sse <= start.sse);
}

TEST_CASE("two-stage forecast follows the last segment") {
    // Log series whose slope drops sharply at t = 60.
    const auto e = oracle::iid_normal(100, 23, 0.02);
    std::vector<double> v(100);
    for (int t = 1; t <= 100; ++t) v[t - 1] = (t <= 60 ? 3.0 + 0.1 * t : 9.0 + 0.01 * (t - 60)) + e[t - 1];
    const TimeSeries y(v);
    DetectOptions opts;
    opts.B = 200;
    const auto snl = forecast_pipeline(y, opts, Method::snl, 5);
    REQUIRE(snl.detection);
    CHECK(snl.detection->result.m_hat >= 1);
    CHECK(std::abs(snl.fit.window_start - 61) <= 3);
    const auto whole = forecast_k(fit_extrapolant(y, 1, Family::linear), 100, 5);
    CHECK(snl.forecast.y_hat < whole.y_hat - 0.5);
    CHECK(std::abs(snl.forecast.y_hat - (9.0 + 0.01 * 45)) < 0.1);

    const auto base = forecast_pipeline(y, opts, Method::logistic, 5);
    CHECK_FALSE(base.detection);
    CHECK(base.fit.window_start == 1);
}

TEST_CASE("no detected change-point means a whole-series fit") {
    const auto e = oracle::iid_normal(80, 24, 0.05);
    std::vector<double> v(80);
    for (int t = 1; t <= 80; ++t) v[t - 1] = 1.0 + 0.05 * t + e[t - 1];
    const TimeSeries y(v);
    DetectOptions opts;
    opts.zeta = 1e12;
    const auto r = forecast_pipeline(y, opts, Method::snq, 7);
    CHECK(r.detection->result.m_hat == 0);
    const auto direct = forecast_k(fit_extrapolant(y, 1, Family::quadratic), 80, 7);
    CHECK(r.forecast.y_hat == direct.y_hat);
}
