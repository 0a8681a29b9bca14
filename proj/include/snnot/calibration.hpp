#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "snnot/segmentation.hpp"
#include "snnot/sn_statistic.hpp"

namespace snnot {

// Surrogate noise for null replicates. G is pivotal, so the uniform option
// only exists to check that claim.
enum class NoiseKind { normal, uniform };

struct QuantileRequest {
    double epsilon = 0.1;
    double delta = 0.02;
    int p = 1;
    std::vector<double> levels{0.90, 0.95, 0.99, 0.995, 0.999};  // 1 - alpha
    int replications = 10000;
    int grid_n = 1000;
    NoiseKind noise = NoiseKind::normal;

    SNConfig config() const { return {epsilon, delta, p}; }
    // Throws ConfigurationError on bad levels, replications < 1, or a
    // trimming pair with no candidates at grid_n.
    void validate() const;
};

struct ThresholdRequest {
    int n = 0;
    RandomIntervalSet intervals;
    int B = 1000;
    double level = 0.95;
};

// G_n of replicate b for b = 0..replications-1, in replicate order.
std::vector<double> null_max_stats(const QuantileRequest& req, std::uint64_t seed, Execution ex = Execution::parallel);

// level -> empirical quantile of G_n under the null.
std::map<double, double> limiting_quantiles(const QuantileRequest& req, std::uint64_t seed,
                                            Execution ex = Execution::parallel);

// max_i G(s_i, e_i) over the fixed interval set, one value per replicate.
std::vector<double> threshold_replicates(const ThresholdRequest& req, const SNConfig& cfg, std::uint64_t seed,
                                         Execution ex = Execution::parallel);

// The level sample quantile of threshold_replicates.
double not_threshold(const ThresholdRequest& req, const SNConfig& cfg, std::uint64_t seed,
                     Execution ex = Execution::parallel);

// Null G for every interval of length >= 2h in a length-n series, for B
// replicates drawn exactly as threshold_replicates draws them. Any interval
// set's threshold is then a lookup, which is what makes a fresh interval set
// per simulated analysis affordable.
class NullStatisticBank {
public:
    NullStatisticBank(int n, const SNConfig& cfg, int B, std::uint64_t seed, Execution ex = Execution::parallel);

    int n() const noexcept { return n_; }
    int h() const noexcept { return h_; }
    int replications() const noexcept { return B_; }

    // Same values as threshold_replicates on the same (n, cfg, B, seed).
    std::vector<double> replicates(const RandomIntervalSet& set) const;
    double threshold(const RandomIntervalSet& set, double level) const;

private:
    std::size_t slot(int s, int e) const noexcept;

    int n_;
    int h_;
    int B_;
    SNConfig cfg_;
    std::vector<std::size_t> offset_;  // first slot of each start s
    std::size_t per_replicate_ = 0;
    std::vector<double> g_;  // B x per_replicate_
};

// One complete analysis: a fresh interval set, its threshold at the given
// level (unless zeta is supplied), and the recursion on that same set.
struct DetectOptions {
    SNConfig cfg;
    int M = 300;
    int B = 1000;
    double level = 0.95;
    std::uint64_t seed = 1;
    std::optional<double> zeta;
};

struct DetectRun {
    RandomIntervalSet intervals;
    double zeta = 0.0;
    ChangePointResult result;
};

DetectRun detect(const TimeSeries& series, const DetectOptions& opts, Execution ex = Execution::parallel);

// Order statistic ceil(level * B) of the sample (1-based).
double sample_quantile(std::span<const double> values, double level);

// Distribution-free standard error of the level quantile from the spread of
// the order statistics at level -/+ sqrt(level (1 - level) / B).
double quantile_standard_error(std::span<const double> values, double level);

// Published simulated quantiles for epsilon in {0.1, 0.2},
// delta in {0.01, ..., 0.04} and levels {0.90, 0.95, 0.99, 0.995, 0.999}.
std::optional<double> published_quantile(double epsilon, double delta, double level);

}  // namespace snnot
