#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "snnot/errors.hpp"
#include "snnot/simulation.hpp"

using namespace snnot;

namespace {

double variance(const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return acc / (x.size() - 1);
}

}  // namespace

TEST_CASE("AR(1) marginal variance and autocorrelation") {
    const int n = 100000;
    const auto iid = gen_ar1(n, {0.0, 1.0}, 1);
    CHECK(std::abs(variance(iid) - 1.0) < 0.03);

    const auto pos = gen_ar1(n, {0.5, 1.0}, 2);
    CHECK(std::abs(oracle::acf_at(pos, 1) - 0.5) < 0.02);
    CHECK(std::abs(variance(pos) - 1.0) < 0.05);

    const auto neg = gen_ar1(n, {-0.5, 0.15}, 3);
    CHECK(std::abs(std::sqrt(variance(neg)) / 0.15 - 1.0) < 0.03);
}

TEST_CASE("AR(1) argument errors and reproducibility") {
    CHECK_THROWS_AS(gen_ar1(10, {1.0, 1.0}, 1), ArgumentError);
    CHECK_THROWS_AS(gen_ar1(10, {-1.2, 1.0}, 1), ArgumentError);
    CHECK_THROWS_AS(gen_ar1(10, {0.2, 0.0}, 1), ArgumentError);
    CHECK(gen_ar1(50, {0.2, 1.0}, 9) == gen_ar1(50, {0.2, 1.0}, 9));
}

TEST_CASE("piecewise generator on the four-segment design") {
    const auto spec = four_segment_spec();
    const std::vector<double> zero(100, 0.0);
    const auto y = gen_piecewise(spec, zero);
    CHECK(y.at(20) == doctest::Approx(3.64).epsilon(1e-14));
    CHECK(y.at(21) == doctest::Approx(5.8 + 1.8 * 0.21).epsilon(1e-14));
    CHECK(y.at(100) == doctest::Approx(15.1).epsilon(1e-14));
    for (int t = 1; t <= 100; ++t) CHECK(y.at(t) == spec.mean(t));

    // Gap at each break: the next segment's mean minus the current one at
    // tau + 1, evaluated directly from the coefficients.
    const std::vector<std::pair<double, double>> coef{{3, 3.2}, {5.8, 1.8}, {9.8, 0.8}, {15.05, 0.05}};
    for (std::size_t i = 0; i < 3; ++i) {
        const int tau = spec.breakpoints[i];
        const double x = (tau + 1) / 100.0;
        const double gap = (coef[i + 1].first + coef[i + 1].second * x) - (coef[i].first + coef[i].second * x);
        const double step = y.at(tau + 1) - y.at(tau);
        const double drift = coef[i].second / 100.0;
        CHECK(step == doctest::Approx(gap + drift).epsilon(1e-12));
    }
    CHECK_THROWS_AS(gen_piecewise(spec, std::vector<double>(99, 0.0)), ArgumentError);

    PiecewiseTrendSpec same{{10}, {PolyCoefficients({1.0, 2.0}), PolyCoefficients({1.0, 2.0})}, 20};
    CHECK_THROWS_AS(same.validate(), ArgumentError);
}

TEST_CASE("Hausdorff distances") {
    auto h = hausdorff({20, 40, 70}, {20, 40, 70}, 100);
    CHECK(h.dH == 0.0);
    h = hausdorff({20, 40, 70}, {22, 40, 69}, 100);
    CHECK(h.d1 == 2.0);
    CHECK(h.d2 == 2.0);
    CHECK(h.dH == 2.0);
    h = hausdorff({20, 40, 70}, {40}, 100);
    CHECK(h.d1 == 0.0);
    CHECK(h.d2 == 30.0);
    CHECK(h.dH == 30.0);
    h = hausdorff({}, {}, 100);
    CHECK(h.dH == 0.0);
    h = hausdorff({20, 40}, {}, 100);
    CHECK(h.dH == 100.0);
    CHECK(h.d1 == 0.0);
    h = hausdorff({}, {33}, 100);
    CHECK(h.dH == 100.0);
    CHECK(h.d2 == 0.0);
}

TEST_CASE("Hausdorff symmetry on random sets") {
    std::mt19937_64 gen(4);
    std::uniform_int_distribution<int> pick(1, 99);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<int> a(1 + rep % 4), b(1 + rep % 3);
        for (auto& v : a) v = pick(gen);
        for (auto& v : b) v = pick(gen);
        const auto ab = hausdorff(a, b, 100);
        const auto ba = hausdorff(b, a, 100);
        CHECK(ab.d1 == ba.d2);
        CHECK(ab.d2 == ba.d1);
        CHECK(ab.dH == ba.dH);
    }
}

TEST_CASE("ARI matches brute-force pair counting") {
    CHECK(adjusted_rand_index({20, 40, 70}, {20, 40, 70}, 100) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({}, {}, 100) == 1.0);

    const double split = adjusted_rand_index({50}, {}, 100);
    CHECK(split == doctest::Approx(oracle::ari_by_pairs(oracle::labels_from_cps({50}, 100),
                                                        oracle::labels_from_cps({}, 100)))
                       .epsilon(1e-12));

    const double a = adjusted_rand_index({20, 40, 70}, {20, 40, 70}, 100);
    const double b = adjusted_rand_index({20, 40, 70}, {21, 40, 70}, 100);
    CHECK(std::abs(a - b) < 0.05);
    CHECK(b == doctest::Approx(oracle::ari_by_pairs(oracle::labels_from_cps({20, 40, 70}, 100),
                                                    oracle::labels_from_cps({21, 40, 70}, 100)))
                   .epsilon(1e-12));

    std::mt19937_64 gen(8);
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 20 + rep;
        std::vector<int> ca, cb;
        std::bernoulli_distribution coin(0.1);
        for (int t = 1; t < n; ++t) {
            if (coin(gen)) ca.push_back(t);
            if (coin(gen)) cb.push_back(t);
        }
        const double got = adjusted_rand_index(ca, cb, n);
        const double want = oracle::ari_by_pairs(oracle::labels_from_cps(ca, n), oracle::labels_from_cps(cb, n));
        CHECK(got >= -1.0);
        CHECK(got <= 1.0);
        CHECK(std::abs(got - want) < 1e-10);
        CHECK((got == doctest::Approx(1.0)) == (ca == cb));
    }
    CHECK_THROWS_AS(adjusted_rand_index({0}, {}, 10), ArgumentError);
}

TEST_CASE("size and power table: layout, serial equals parallel") {
    const auto par = run_size_power(100, {-0.5, 0.5}, {0.05, 0.10}, 40, 3, Execution::parallel);
    const auto ser = run_size_power(100, {-0.5, 0.5}, {0.05, 0.10}, 40, 3, Execution::serial);
    REQUIRE(par.cells.size() == 4);
    for (std::size_t i = 0; i < par.cells.size(); ++i) {
        CHECK(par.cells[i].size == ser.cells[i].size);
        CHECK(par.cells[i].power == ser.cells[i].power);
    }
    CHECK(par.cells[0].alpha == 0.05);
    CHECK(par.cells[0].rho == -0.5);
    CHECK(par.cells[0].critical_value == 32.727);
    CHECK(par.cells[2].critical_value == 24.959);
    std::ostringstream os;
    write_csv(os, par);
    CHECK(os.str().rfind("measure,alpha,n,rho,value,critical_value\n", 0) == 0);
    CHECK_THROWS_AS(run_size_power(100, {0.0}, {0.07}, 10, 1), ConfigurationError);
}

TEST_CASE("a rho's replicates do not depend on the rest of the grid") {
    const auto a = run_size_power(100, {0.0}, {0.05}, 30, 5);
    const auto b = run_size_power(100, {0.5, 0.0}, {0.05}, 30, 5);
    CHECK(a.cells[0].size == b.cells[1].size);
    CHECK(a.cells[0].null_quantile == b.cells[1].null_quantile);
}

TEST_CASE("multiple change-point table: small run") {
    MultiCpOptions opts;
    opts.B = 50;
    opts.M = 60;
    const auto t = run_multi_cp(20, {0.0}, 7, opts);
    REQUIRE(t.rows.size() == 1);
    const auto& r = t.rows[0];
    CHECK(r.m_exact + r.m_off_one + r.m_off_more == doctest::Approx(1.0));
    CHECK(r.ari <= 1.0);
    CHECK(r.dH >= std::max(r.d1, r.d2) - 1e-12);
    CHECK(t.mean_zeta > 0.0);
    const auto again = run_multi_cp(20, {0.0}, 7, opts, Execution::serial);
    CHECK(again.rows[0].ari == r.ari);
    CHECK(again.rows[0].dH == r.dH);
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str().find("m_hat=3") != std::string::npos);
}
