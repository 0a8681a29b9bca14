#include "snnot/segmentation.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "snnot/errors.hpp"
#include "snnot/rng.hpp"

namespace snnot {

namespace {

std::string describe(const Interval& iv) {
    return "(" + std::to_string(iv.s) + ", " + std::to_string(iv.e) + ")";
}

}  // namespace

void RandomIntervalSet::validate() const {
    if (M != static_cast<int>(intervals.size())) {
        throw ConfigurationError("interval set holds " + std::to_string(intervals.size()) + " intervals, M = " +
                                 std::to_string(M));
    }
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (iv.s < 1 || iv.e > n || iv.s >= iv.e || iv.length() < 2 * h) {
            throw ConfigurationError("interval " + std::to_string(i) + " " + describe(iv) +
                                     " is infeasible for n = " + std::to_string(n) + ", h = " + std::to_string(h));
        }
    }
}

RandomIntervalSet sample_intervals(int n, int M, int h, std::uint64_t seed, std::uint64_t replicate) {
    if (M < 1) throw ArgumentError("M must be at least 1");
    if (h < 1) throw ConfigurationError("h must be at least 1");
    if (n < 2 * h) {
        throw ConfigurationError("n = " + std::to_string(n) + " is shorter than 2h = " + std::to_string(2 * h));
    }
    RandomIntervalSet set{{}, n, M, h};
    set.intervals.reserve(static_cast<std::size_t>(M));
    auto gen = substream(seed, replicate, Stream::intervals);
    std::uniform_int_distribution<int> pick(1, n);
    const long long cap = 1000LL * M;
    long long attempts = 0;
    while (static_cast<int>(set.intervals.size()) < M) {
        if (++attempts > cap) {
            throw ConfigurationError("interval sampling gave up after " + std::to_string(cap) + " attempts");
        }
        int s = pick(gen), e = pick(gen);
        if (s > e) std::swap(s, e);
        if (s == e || e - s + 1 < 2 * h) continue;
        set.intervals.push_back({s, e});
    }
    return set;
}

std::vector<IntervalScore> score_intervals(const SnStatistic& sn, const RandomIntervalSet& set, Execution ex) {
    set.validate();
    if (set.n != sn.n()) {
        throw ConfigurationError("interval set built for n = " + std::to_string(set.n) + ", series has n = " +
                                 std::to_string(sn.n()));
    }
    if (set.h != sn.h()) {
        throw ConfigurationError("interval set built with h = " + std::to_string(set.h) + ", configuration gives h = " +
                                 std::to_string(sn.h()));
    }
    const int count = static_cast<int>(set.intervals.size());
    std::vector<IntervalScore> out(static_cast<std::size_t>(count));
    [[maybe_unused]] const bool par = ex == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
    for (int i = 0; i < count; ++i) {
        const auto& iv = set.intervals[static_cast<std::size_t>(i)];
        if (auto r = sn.try_max_stat(iv.s, iv.e, Execution::serial)) {
            out[static_cast<std::size_t>(i)] = {r->statistic, r->argmax, true};
        }
    }
    return out;
}

ChangePointResult sn_not(const std::vector<IntervalScore>& scores, const RandomIntervalSet& set, double zeta) {
    if (!(zeta > 0.0)) throw ArgumentError("threshold must be positive");
    if (scores.size() != set.intervals.size()) throw ArgumentError("one score per interval required");

    ChangePointResult res;
    // Explicit stack; each pop is one call of the recursion on [s, e].
    std::vector<std::pair<int, int>> work{{1, set.n}};
    while (!work.empty()) {
        const auto [s, e] = work.back();
        work.pop_back();
        if (e - s + 1 < 2 * set.h) continue;

        int best = -1;
        for (int i = 0; i < static_cast<int>(set.intervals.size()); ++i) {
            const auto& iv = set.intervals[static_cast<std::size_t>(i)];
            const auto& sc = scores[static_cast<std::size_t>(i)];
            if (iv.s < s || iv.e > e || !sc.usable || !(sc.statistic > zeta)) continue;
            if (best < 0) {
                best = i;
                continue;
            }
            const auto& cur = set.intervals[static_cast<std::size_t>(best)];
            if (iv.length() < cur.length() || (iv.length() == cur.length() && iv.s < cur.s)) best = i;
        }
        if (best < 0) continue;

        const auto& sc = scores[static_cast<std::size_t>(best)];
        const int tau = sc.argmax;
        res.detections.push_back({tau, set.intervals[static_cast<std::size_t>(best)], best, sc.statistic, zeta});
        res.tau_hat.push_back(tau);
        // Right half pushed first so the left half is processed first.
        work.emplace_back(tau + 1, e);
        work.emplace_back(s, tau);
    }
    std::sort(res.tau_hat.begin(), res.tau_hat.end());
    res.m_hat = static_cast<int>(res.tau_hat.size());
    return res;
}

ChangePointResult sn_not(const TimeSeries& series, const SNConfig& cfg, const RandomIntervalSet& set, double zeta,
                         Execution ex) {
    cfg.validate();
    SnStatistic sn(series, cfg);
    return sn_not(score_intervals(sn, set, ex), set, zeta);
}

std::vector<Interval> segments_from(const std::vector<int>& tau_hat, int n) {
    std::vector<Interval> out;
    int start = 1;
    for (int t : tau_hat) {
        if (t < start || t >= n) throw ArgumentError("change-points must be increasing and inside [1, n)");
        out.push_back({start, t});
        start = t + 1;
    }
    out.push_back({start, n});
    return out;
}

}  // namespace snnot
