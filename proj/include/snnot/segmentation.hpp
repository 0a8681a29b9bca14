#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "snnot/regression.hpp"
#include "snnot/sn_statistic.hpp"

namespace snnot {

struct Interval {
    int s = 0;
    int e = 0;
    int length() const noexcept { return e - s + 1; }
    bool operator==(const Interval&) const = default;
};

// The random interval set used both for threshold calibration and detection.
struct RandomIntervalSet {
    std::vector<Interval> intervals;
    int n = 0;
    int M = 0;
    int h = 0;

    // Throws ConfigurationError naming the first interval that is outside
    // [1, n], has s >= e, or is shorter than 2h.
    void validate() const;
};

// M pairs drawn uniformly from {1..n}, sorted, kept when s < e and
// e - s + 1 >= 2h. Rejection gives up after 1000 M attempts. Distinct
// replicate indices give independent sets under one seed.
RandomIntervalSet sample_intervals(int n, int M, int h, std::uint64_t seed, std::uint64_t replicate = 0);

// G over one interval of the set; empty when no candidate was usable.
struct IntervalScore {
    double statistic = 0.0;
    int argmax = 0;
    bool usable = false;
};

// G and its argmax for every interval. Independent of the working interval of
// the recursion, so computed once and then filtered.
std::vector<IntervalScore> score_intervals(const SnStatistic& sn, const RandomIntervalSet& set,
                                           Execution ex = Execution::parallel);

struct Detection {
    int tau = 0;
    Interval interval;
    int index = 0;  // position of the detecting interval in the set
    double statistic = 0.0;
    double zeta = 0.0;
};

struct ChangePointResult {
    std::vector<int> tau_hat;  // sorted
    int m_hat = 0;
    std::vector<Detection> detections;  // in order of detection
};

// Narrowest-over-threshold recursion on precomputed scores.
ChangePointResult sn_not(const std::vector<IntervalScore>& scores, const RandomIntervalSet& set, double zeta);

ChangePointResult sn_not(const TimeSeries& series, const SNConfig& cfg, const RandomIntervalSet& set, double zeta,
                         Execution ex = Execution::parallel);

// Segments [1, tau_1], [tau_1 + 1, tau_2], ..., [tau_m + 1, n].
std::vector<Interval> segments_from(const std::vector<int>& tau_hat, int n);

}  // namespace snnot
