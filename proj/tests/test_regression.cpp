#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "snnot/errors.hpp"
#include "snnot/regression.hpp"

using namespace snnot;

TEST_CASE("design_row endpoints and powers") {
    CHECK(design_row(10, 10, 1) == DesignRow{1.0, 1.0});
    const auto r = design_row(1, 2, 2);
    CHECK(r == DesignRow{1.0, 0.5, 0.25});
    const auto r3 = design_row(3, 10, 3);
    REQUIRE(r3.size() == 4);
    CHECK(r3[0] == 1.0);
    CHECK(r3[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(r3[2] == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(r3[3] == doctest::Approx(0.027).epsilon(1e-15));
}

TEST_CASE("design_row rejects bad arguments") {
    CHECK_THROWS_AS(design_row(0, 5, 1), ArgumentError);
    CHECK_THROWS_AS(design_row(6, 5, 1), ArgumentError);
    CHECK_THROWS_AS(design_row(2, 5, -1), ArgumentError);
}

TEST_CASE("time series invariants") {
    CHECK_THROWS_AS(TimeSeries(std::vector<double>{}), ArgumentError);
    CHECK_THROWS_AS(TimeSeries(std::vector<double>{1.0, NAN}), ArgumentError);
    using std::chrono::days;
    const Date d0{std::chrono::year{2020} / 3 / 1};
    CHECK_THROWS_AS(TimeSeries({1.0, 2.0}, {d0, d0}), ArgumentError);
    CHECK_THROWS_AS(TimeSeries({1.0, 2.0}, {d0}), ArgumentError);
    TimeSeries ok({1.0, 2.0}, {d0, d0 + days{1}});
    CHECK(ok.label(2) == d0 + days{1});
}

TEST_CASE("ols_fit recovers an exact line") {
    const int n = 50;
    std::vector<double> y(n);
    for (int t = 1; t <= n; ++t) y[t - 1] = 3.0 + 2.0 * t / n;
    TimeSeries s(y);
    const auto fit = ols_fit(s, 1, n, 1);
    CHECK(fit[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit[1] == doctest::Approx(2.0).epsilon(1e-12));
    const auto sub = ols_fit(s, 31, 40, 1);
    CHECK(sub[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(sub[1] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("ols_fit on a constant series") {
    TimeSeries s(std::vector<double>(20, 7.0));
    for (auto [i, j] : {std::pair{1, 20}, std::pair{4, 9}, std::pair{17, 20}}) {
        const auto fit = ols_fit(s, i, j, 1);
        CHECK(fit[0] == doctest::Approx(7.0).epsilon(1e-12));
        CHECK(std::abs(fit[1]) < 1e-10);
    }
}

TEST_CASE("ols_fit matches the closed-form simple regression") {
    // x = (0.25, 0.5, 0.75, 1): xbar 0.625, Sxx 0.3125, Sxy 1.3, so b = 4.16, a = -0.05.
    TimeSeries s({1.0, 2.1, 2.9, 4.2});
    const auto fit = ols_fit(s, 1, 4, 1);
    CHECK(fit[0] == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(fit[1] == doctest::Approx(4.16).epsilon(1e-12));

    const auto res = segment_residuals(s, 1, 4, fit);
    const double expected[] = {0.01, 0.07, -0.17, 0.09};
    for (int t = 0; t < 4; ++t) CHECK(res[t] == doctest::Approx(expected[t]).epsilon(1e-10));
}

TEST_CASE("ols_fit window errors") {
    TimeSeries s({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK_THROWS_AS(ols_fit(s, 1, 2, 1), DegenerateWindowError);
    CHECK_THROWS_AS(ols_fit(s, 1, 3, 2), DegenerateWindowError);
    CHECK_THROWS_AS(ols_fit(s, 0, 3, 1), ArgumentError);
    CHECK_THROWS_AS(ols_fit(s, 3, 3, 0), ArgumentError);
    CHECK_THROWS_AS(ols_fit(s, 2, 6, 1), ArgumentError);
}

TEST_CASE("ols_fit properties over random windows") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 40; ++rep) {
        const int n = 30 + rep * 7;
        const int p = rep % 4;
        std::vector<double> y(n);
        for (auto& v : y) v = nd(gen);
        std::uniform_int_distribution<int> pick(1, n);
        int i = pick(gen), j = pick(gen);
        if (i > j) std::swap(i, j);
        if (j - i + 1 < p + 2) {
            i = 1;
            j = n;
        }
        TimeSeries s(y);
        const auto fit = ols_fit(s, i, j, p);

        // Orthogonality: residuals are orthogonal to every design column.
        const auto res = segment_residuals(s, i, j, fit);
        double scale = 0.0;
        for (int t = i; t <= j; ++t) scale += std::abs(y[t - 1]);
        for (int col = 0; col <= p; ++col) {
            double acc = 0.0;
            for (int t = i; t <= j; ++t) acc += res[t - i] * std::pow(static_cast<double>(t) / n, col);
            CHECK(std::abs(acc) <= 1e-8 * scale);
        }

        // Affine equivariance.
        const double c = 2.5, d = -4.0;
        std::vector<double> z(n);
        for (int t = 0; t < n; ++t) z[t] = c * y[t] + d;
        const auto fz = ols_fit(TimeSeries(z), i, j, p);
        double norm = 0.0;
        for (int k = 0; k <= p; ++k) norm = std::max(norm, std::abs(c * fit[k]));
        for (int k = 0; k <= p; ++k) {
            const double want = c * fit[k] + (k == 0 ? d : 0.0);
            CHECK(std::abs(fz[k] - want) <= 1e-9 * std::max(norm, std::abs(d)));
        }

        // Agreement with the long-double oracle.
        const auto ref = oracle::window_beta(y, i, j, p);
        double rnorm = 0.0;
        for (auto v : ref) rnorm = std::max(rnorm, static_cast<double>(std::fabs(v)));
        for (int k = 0; k <= p; ++k) CHECK(std::abs(fit[k] - static_cast<double>(ref[k])) <= 1e-8 * rnorm);
    }
}

TEST_CASE("ols_fit exactness for polynomials of lower order") {
    const int n = 120;
    const std::vector<double> truth{1.5, -2.0, 0.75, 0.3};
    for (int q = 0; q <= 3; ++q) {
        for (int p = q; p <= 3; ++p) {
            std::vector<double> y(n);
            for (int t = 1; t <= n; ++t) {
                double x = static_cast<double>(t) / n, acc = 0.0, xp = 1.0;
                for (int j = 0; j <= q; ++j) {
                    acc += truth[j] * xp;
                    xp *= x;
                }
                y[t - 1] = acc;
            }
            const auto fit = ols_fit(TimeSeries(y), 61, 100, p);
            for (int j = 0; j <= p; ++j) {
                const double want = j <= q ? truth[j] : 0.0;
                CHECK(std::abs(fit[j] - want) <= 1e-8 * std::max(1.0, std::abs(want)));
            }
        }
    }
}

TEST_CASE("segment residuals vanish on an exact polynomial window") {
    std::vector<double> y(40);
    for (int t = 1; t <= 40; ++t) y[t - 1] = 1.0 + 0.5 * t / 40.0 - 0.25 * (t / 40.0) * (t / 40.0);
    TimeSeries s(y);
    const auto fit = ols_fit(s, 5, 25, 2);
    for (double r : segment_residuals(s, 5, 25, fit)) CHECK(std::abs(r) < 1e-12);
    CHECK_THROWS_AS(segment_residuals(s, 30, 41, fit), ArgumentError);
}

TEST_CASE("solve_pivoted flags singular systems") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 4.0;
    CHECK_FALSE(solve_pivoted(a, {1.0, 2.0}).has_value());
    a(1, 1) = 5.0;
    const auto x = solve_pivoted(a, {1.0, 2.0});
    REQUIRE(x.has_value());
    CHECK((*x)[0] == doctest::Approx(1.0));
    CHECK(std::abs((*x)[1]) < 1e-15);
}
