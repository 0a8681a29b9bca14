#include <cmath>

#include "doctest.h"
#include "snnot/calibration.hpp"
#include "snnot/errors.hpp"
#include "snnot/rng.hpp"

using namespace snnot;

TEST_CASE("sample quantile uses the ceil(level B) order statistic") {
    const std::vector<double> v{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    CHECK(sample_quantile(v, 0.95) == 10.0);
    CHECK(sample_quantile(v, 0.9) == 9.0);  // 0.9 * 10 must not round up to 10
    CHECK(sample_quantile(v, 0.5) == 5.0);
    CHECK(sample_quantile(v, 0.01) == 1.0);
    CHECK(sample_quantile(std::vector<double>{3.5}, 0.95) == 3.5);
    CHECK_THROWS_AS(sample_quantile(v, 1.0), ConfigurationError);
    CHECK_THROWS_AS(sample_quantile(std::vector<double>{}, 0.5), ArgumentError);
}

TEST_CASE("published table lookup") {
    CHECK(published_quantile(0.1, 0.02, 0.95) == 32.727);
    CHECK(published_quantile(0.1, 0.01, 0.90) == 14.963);
    CHECK(published_quantile(0.2, 0.04, 0.999) == 49.495);
    CHECK_FALSE(published_quantile(0.15, 0.02, 0.95).has_value());
    CHECK_FALSE(published_quantile(0.1, 0.02, 0.97).has_value());
}

TEST_CASE("limiting quantiles: monotone in level, reproducible, serial equals parallel") {
    QuantileRequest req;
    req.grid_n = 200;
    req.replications = 300;
    const auto a = limiting_quantiles(req, 42, Execution::parallel);
    const auto b = limiting_quantiles(req, 42, Execution::serial);
    CHECK(a == b);
    double prev = -1.0;
    for (auto [level, value] : a) {
        CHECK(value >= prev);
        prev = value;
    }
    CHECK(limiting_quantiles(req, 43) != a);
}

TEST_CASE("quantile request validation") {
    QuantileRequest req;
    req.levels = {0.95, 1.2};
    CHECK_THROWS_AS(req.validate(), ConfigurationError);
    req.levels = {0.95};
    req.replications = 0;
    CHECK_THROWS_AS(req.validate(), ConfigurationError);
    req.replications = 10;
    req.grid_n = 9;  // h = 0
    CHECK_THROWS_AS(req.validate(), ConfigurationError);
    req.grid_n = 6;
    req.epsilon = 0.5;  // only k = 3, where both summation ranges are empty
    CHECK_THROWS_AS(req.validate(), ConfigurationError);
    req.epsilon = 0.1;
    req.grid_n = 10;  // k = 6 has a left-hand term
    CHECK_NOTHROW(req.validate());
    req.delta = 0.06;
    req.grid_n = 1000;
    CHECK_THROWS_AS(req.validate(), ConfigurationError);
}

TEST_CASE("threshold with one replicate and the full interval is that replicate's G") {
    const SNConfig cfg;
    const int n = 120;
    const RandomIntervalSet set{{{1, n}}, n, 1, cfg.h(n)};
    const double zeta = not_threshold({n, set, 1, 0.95}, cfg, 77);

    auto gen = substream(77, 0, Stream::threshold);
    std::normal_distribution<double> nd;
    std::vector<double> y(n);
    for (auto& v : y) v = nd(gen);
    CHECK(zeta == SnStatistic(y, cfg).max_stat(1, n).statistic);
}

TEST_CASE("threshold replicates are order independent and reproducible") {
    const SNConfig cfg;
    const int n = 100;
    const auto set = sample_intervals(n, 50, cfg.h(n), 5);
    const ThresholdRequest req{n, set, 40, 0.95};
    const auto a = threshold_replicates(req, cfg, 9, Execution::parallel);
    const auto b = threshold_replicates(req, cfg, 9, Execution::serial);
    CHECK(a == b);
    for (double v : a) CHECK(v > 0.0);
}

TEST_CASE("threshold configuration errors") {
    const SNConfig cfg;
    const int n = 100;
    auto set = sample_intervals(n, 10, cfg.h(n), 5);
    CHECK_THROWS_AS(not_threshold({n, set, 0, 0.95}, cfg, 1), ConfigurationError);
    CHECK_THROWS_AS(not_threshold({n + 1, set, 10, 0.95}, cfg, 1), ConfigurationError);
    set.intervals[3] = {50, 60};
    CHECK_THROWS_AS(not_threshold({n, set, 10, 0.95}, cfg, 1), ConfigurationError);
    CHECK_THROWS_AS(not_threshold({n, RandomIntervalSet{{}, n, 0, 10}, 10, 0.95}, cfg, 1), ConfigurationError);
}

TEST_CASE("threshold agrees across independent streams") {
    // n = 100, M = 300, B = 1000: two runs on different seeds agree within 10%.
    const SNConfig cfg;
    const int n = 100;
    const auto set = sample_intervals(n, 300, cfg.h(n), 2020);
    const double z1 = not_threshold({n, set, 1000, 0.95}, cfg, 1);
    const double z2 = not_threshold({n, set, 1000, 0.95}, cfg, 2);
    CHECK(std::abs(z1 - z2) / z1 < 0.10);
}

TEST_CASE("G is pivotal: uniform and normal surrogates give the same 95% quantile") {
    QuantileRequest req;
    req.levels = {0.95};
    req.replications = 2000;
    req.grid_n = 1000;
    const auto normal = null_max_stats(req, 11);
    req.noise = NoiseKind::uniform;
    const auto uniform = null_max_stats(req, 12);
    const double diff = sample_quantile(normal, 0.95) - sample_quantile(uniform, 0.95);
    const double se = std::hypot(quantile_standard_error(normal, 0.95), quantile_standard_error(uniform, 0.95));
    INFO("difference " << diff << ", standard error " << se);
    CHECK(std::abs(diff) < 3.0 * se);
}

TEST_CASE("null bank thresholds equal direct threshold replicates") {
    const SNConfig cfg;
    const int n = 60;
    const NullStatisticBank bank(n, cfg, 25, 31);
    for (std::uint64_t r = 0; r < 3; ++r) {
        const auto set = sample_intervals(n, 40, cfg.h(n), 8, r);
        CHECK(bank.replicates(set) == threshold_replicates({n, set, 25, 0.95}, cfg, 31));
        CHECK(bank.threshold(set, 0.9) == not_threshold({n, set, 25, 0.9}, cfg, 31));
    }
    CHECK_THROWS_AS(bank.replicates(sample_intervals(70, 10, cfg.h(70), 1)), ConfigurationError);
}
