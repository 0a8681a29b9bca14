#include "snnot/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <string>

#include "snnot/errors.hpp"
#include "snnot/rng.hpp"

namespace snnot {

namespace {

std::vector<double> draw_noise(std::mt19937_64& gen, int n, NoiseKind kind) {
    std::vector<double> y(static_cast<std::size_t>(n));
    if (kind == NoiseKind::normal) {
        std::normal_distribution<double> nd;
        for (auto& v : y) v = nd(gen);
    } else {
        std::uniform_real_distribution<double> ud(-0.5, 0.5);
        for (auto& v : y) v = ud(gen);
    }
    return y;
}

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigurationError("quantile level must lie in (0, 1)");
}

// Runs body(b) for b in [0, count) and rethrows the first failure by index,
// so the reported error does not depend on scheduling.
template <class Body>
void for_replicates(int count, Execution ex, Body&& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    [[maybe_unused]] const bool par = ex == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
    for (int b = 0; b < count; ++b) {
        try {
            body(b);
        } catch (...) {
            errors[static_cast<std::size_t>(b)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void check_threshold_intervals(const RandomIntervalSet& set, const SNConfig& cfg) {
    set.validate();
    const std::vector<double> zeros(static_cast<std::size_t>(set.n), 0.0);
    const SnStatistic probe(zeros, cfg);
    for (std::size_t i = 0; i < set.intervals.size(); ++i) {
        const auto& iv = set.intervals[i];
        if (probe.feasible_candidates(iv.s, iv.e) == 0) {
            throw ConfigurationError("interval " + std::to_string(i) + " (" + std::to_string(iv.s) + ", " +
                                     std::to_string(iv.e) + ") has no feasible candidate");
        }
    }
}

std::vector<double> null_series(std::uint64_t seed, int b, int n) {
    auto gen = substream(seed, static_cast<std::uint64_t>(b), Stream::threshold);
    return draw_noise(gen, n, NoiseKind::normal);
}

}  // namespace

void QuantileRequest::validate() const {
    config().validate();
    if (replications < 1) throw ConfigurationError("replications must be at least 1");
    if (levels.empty()) throw ConfigurationError("at least one quantile level required");
    for (double l : levels) check_level(l);
    const SNConfig cfg = config();
    if (grid_n < 2 || cfg.h(grid_n) < 1 || 2 * cfg.h(grid_n) > grid_n) {
        throw ConfigurationError("trimming leaves no candidates at grid_n = " + std::to_string(grid_n));
    }
    const std::vector<double> zeros(static_cast<std::size_t>(grid_n), 0.0);
    if (SnStatistic(zeros, cfg).feasible_candidates(1, grid_n) == 0) {
        throw ConfigurationError("no feasible candidate at grid_n = " + std::to_string(grid_n));
    }
}

std::vector<double> null_max_stats(const QuantileRequest& req, std::uint64_t seed, Execution ex) {
    req.validate();
    const SNConfig cfg = req.config();
    std::vector<double> out(static_cast<std::size_t>(req.replications));
    for_replicates(req.replications, ex, [&](int b) {
        auto gen = substream(seed, static_cast<std::uint64_t>(b), Stream::quantiles);
        const auto y = draw_noise(gen, req.grid_n, req.noise);
        out[static_cast<std::size_t>(b)] = SnStatistic(y, cfg).max_stat(1, req.grid_n).statistic;
    });
    return out;
}

std::map<double, double> limiting_quantiles(const QuantileRequest& req, std::uint64_t seed, Execution ex) {
    const auto draws = null_max_stats(req, seed, ex);
    std::map<double, double> out;
    for (double l : req.levels) out[l] = sample_quantile(draws, l);
    return out;
}

std::vector<double> threshold_replicates(const ThresholdRequest& req, const SNConfig& cfg, std::uint64_t seed,
                                         Execution ex) {
    cfg.validate();
    if (req.B < 1) throw ConfigurationError("B must be at least 1");
    check_level(req.level);
    const auto& set = req.intervals;
    if (set.intervals.empty()) throw ConfigurationError("interval set is empty");
    if (set.n != req.n) throw ConfigurationError("interval set built for a different n");
    if (set.h != cfg.h(req.n)) throw ConfigurationError("interval set built with a different h");
    check_threshold_intervals(set, cfg);

    std::vector<double> out(static_cast<std::size_t>(req.B));
    for_replicates(req.B, ex, [&](int b) {
        const SnStatistic sn(null_series(seed, b, req.n), cfg);
        double best = 0.0;
        for (const auto& sc : score_intervals(sn, set, Execution::serial)) {
            if (sc.usable) best = std::max(best, sc.statistic);
        }
        out[static_cast<std::size_t>(b)] = best;
    });
    return out;
}

double not_threshold(const ThresholdRequest& req, const SNConfig& cfg, std::uint64_t seed, Execution ex) {
    return sample_quantile(threshold_replicates(req, cfg, seed, ex), req.level);
}

DetectRun detect(const TimeSeries& series, const DetectOptions& opts, Execution ex) {
    opts.cfg.validate();
    const int n = series.length();
    DetectRun run;
    run.intervals = sample_intervals(n, opts.M, opts.cfg.h(n), opts.seed);
    run.zeta = opts.zeta ? *opts.zeta : not_threshold({n, run.intervals, opts.B, opts.level}, opts.cfg, opts.seed, ex);
    run.result = sn_not(series, opts.cfg, run.intervals, run.zeta, ex);
    return run;
}

NullStatisticBank::NullStatisticBank(int n, const SNConfig& cfg, int B, std::uint64_t seed, Execution ex)
    : n_(n), h_(cfg.h(n)), B_(B), cfg_(cfg) {
    cfg.validate();
    if (B < 1) throw ConfigurationError("B must be at least 1");
    if (h_ < 1 || n < 2 * h_) throw ConfigurationError("n = " + std::to_string(n) + " too short for 2h");
    offset_.assign(static_cast<std::size_t>(n + 2), 0);
    for (int s = 1; s <= n; ++s) {
        const int count = std::max(0, n - (s + 2 * h_ - 1) + 1);
        offset_[static_cast<std::size_t>(s + 1)] = offset_[static_cast<std::size_t>(s)] + static_cast<std::size_t>(count);
    }
    per_replicate_ = offset_[static_cast<std::size_t>(n + 1)];
    g_.assign(per_replicate_ * static_cast<std::size_t>(B), 0.0);
    for_replicates(B, ex, [&](int b) {
        const SnStatistic sn(null_series(seed, b, n), cfg);
        double* row = g_.data() + per_replicate_ * static_cast<std::size_t>(b);
        for (int s = 1; s <= n; ++s) {
            for (int e = s + 2 * h_ - 1; e <= n; ++e) {
                if (auto r = sn.try_max_stat(s, e, Execution::serial)) row[slot(s, e)] = r->statistic;
            }
        }
    });
}

std::size_t NullStatisticBank::slot(int s, int e) const noexcept {
    return offset_[static_cast<std::size_t>(s)] + static_cast<std::size_t>(e - (s + 2 * h_ - 1));
}

std::vector<double> NullStatisticBank::replicates(const RandomIntervalSet& set) const {
    if (set.intervals.empty()) throw ConfigurationError("interval set is empty");
    if (set.n != n_ || set.h != h_) throw ConfigurationError("interval set built for a different n or h");
    check_threshold_intervals(set, cfg_);
    std::vector<std::size_t> slots;
    slots.reserve(set.intervals.size());
    for (const auto& iv : set.intervals) slots.push_back(slot(iv.s, iv.e));
    std::vector<double> out(static_cast<std::size_t>(B_));
    for (int b = 0; b < B_; ++b) {
        const double* row = g_.data() + per_replicate_ * static_cast<std::size_t>(b);
        double best = 0.0;
        for (auto sl : slots) best = std::max(best, row[sl]);
        out[static_cast<std::size_t>(b)] = best;
    }
    return out;
}

double NullStatisticBank::threshold(const RandomIntervalSet& set, double level) const {
    return sample_quantile(replicates(set), level);
}

double sample_quantile(std::span<const double> values, double level) {
    check_level(level);
    if (values.empty()) throw ArgumentError("quantile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto b = static_cast<double>(sorted.size());
    // Guard against level * B landing a hair above an integer.
    auto idx = static_cast<std::size_t>(std::ceil(level * b - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, sorted.size());
    return sorted[idx - 1];
}

double quantile_standard_error(std::span<const double> values, double level) {
    check_level(level);
    if (values.size() < 2) throw ArgumentError("standard error needs at least two values");
    const double b = static_cast<double>(values.size());
    const double z = std::sqrt(level * (1.0 - level) / b);
    const double lo = std::max(level - z, 1.0 / b);
    const double hi = std::min(level + z, 1.0 - 1e-12);
    return 0.5 * (sample_quantile(values, hi) - sample_quantile(values, lo));
}

std::optional<double> published_quantile(double epsilon, double delta, double level) {
    struct Row {
        double epsilon, delta;
        std::array<double, 5> values;
    };
    static constexpr std::array<double, 5> kLevels{0.90, 0.95, 0.99, 0.995, 0.999};
    static constexpr std::array<Row, 8> kTable{{
        {0.1, 0.01, {14.963, 19.284, 32.168, 36.145, 45.354}},
        {0.1, 0.02, {24.959, 32.727, 53.645, 64.898, 92.982}},
        {0.1, 0.03, {38.277, 50.872, 83.713, 107.062, 137.433}},
        {0.1, 0.04, {54.569, 76.244, 116.497, 144.437, 182.786}},
        {0.2, 0.01, {4.656, 5.905, 9.691, 12.037, 14.148}},
        {0.2, 0.02, {7.217, 9.404, 15.486, 18.389, 24.079}},
        {0.2, 0.03, {10.526, 13.767, 23.060, 26.758, 36.388}},
        {0.2, 0.04, {14.439, 19.075, 33.049, 37.426, 49.495}},
    }};
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
    for (const auto& row : kTable) {
        if (!near(row.epsilon, epsilon) || !near(row.delta, delta)) continue;
        for (std::size_t j = 0; j < kLevels.size(); ++j)
            if (near(kLevels[j], level)) return row.values[j];
    }
    return std::nullopt;
}

}  // namespace snnot
