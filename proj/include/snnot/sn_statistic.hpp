#pragma once

#include <optional>
#include <span>
#include <vector>

#include "snnot/regression.hpp"
#include "snnot/window_fitter.hpp"

namespace snnot {

// How a data-parallel loop runs. Serial is the reference path; both produce
// bit-identical results because every iteration writes its own slot and all
// reductions happen afterwards in index order.
enum class Execution { serial, parallel };

// Global trimming epsilon, local trimming delta, polynomial order p.
struct SNConfig {
    double epsilon = 0.1;
    double delta = 0.02;
    int p = 1;

    // Throws ConfigurationError unless 0 < delta < epsilon/2 < 1/4 and 1 <= p <= kMaxOrder.
    void validate() const;

    // floor(epsilon * n) and floor(delta * n). A 1e-9 guard keeps products
    // such as 0.29 * 100 from flooring one below the intended integer.
    int h(int n) const noexcept;
    int d(int n) const noexcept;
};

struct SNEvaluation {
    int k = 0;
    std::vector<double> contrast;
    Matrix normalizer;
    double statistic = 0.0;
};

struct MaxStatResult {
    double statistic = 0.0;
    int argmax = 0;
    int candidates = 0;  // size of {s+h-1, ..., e-h}
    int skipped = 0;     // infeasible or singular candidates
};

// Contrast, self-normalizer and SN statistic for one series. Construction
// builds the prefix accumulators once; every query after that is O(n p^2) or
// better.
class SnStatistic {
public:
    SnStatistic(std::span<const double> values, SNConfig cfg);
    SnStatistic(const TimeSeries& series, SNConfig cfg) : SnStatistic(series.values(), cfg) {}

    const SNConfig& config() const noexcept { return cfg_; }
    int n() const noexcept { return fitter_.n(); }
    int h() const noexcept { return h_; }
    int d() const noexcept { return d_; }
    const WindowFitter& fitter() const noexcept { return fitter_; }

    // D_n(t1, k, t2).
    std::vector<double> contrast(int t1, int k, int t2) const;
    // V = L + R with local trimming d.
    Matrix self_normalizer(int t1, int k, int t2) const;
    // D^T V^{-1} D together with its parts; throws SingularNormalizerError.
    SNEvaluation evaluate(int t1, int k, int t2) const;
    double statistic(int t1, int k, int t2) const { return evaluate(t1, k, t2).statistic; }

    // Candidates in {s+h-1, ..., e-h} whose contrast and normalizer windows
    // are all long enough. Depends only on (s, e, n, cfg), not on the data.
    int feasible_candidates(int s, int e) const noexcept;

    // T(s, k, e) for k = s+h-1 .. e-h; NaN marks a skipped candidate.
    std::vector<double> scan(int s, int e, Execution ex = Execution::serial) const;

    // max over the candidate range with ties going to the smallest k.
    MaxStatResult max_stat(int s, int e, Execution ex = Execution::serial) const;

    // Same as max_stat but returns nullopt instead of throwing when the
    // interval is too short or no candidate is usable.
    std::optional<MaxStatResult> try_max_stat(int s, int e, Execution ex = Execution::serial) const;

private:
    void check_contrast_window(int t1, int k, int t2) const;
    void compute(int t1, int k, int t2, std::vector<double>& contrast_out, Matrix& v_out) const;

    SNConfig cfg_;
    WindowFitter fitter_;
    int h_;
    int d_;
};

// Position of the largest non-NaN value, first one on ties; -1 if all NaN.
int first_argmax(std::span<const double> values) noexcept;

std::vector<double> contrast(const TimeSeries& series, int t1, int k, int t2, const SNConfig& cfg);
Matrix self_normalizer(const TimeSeries& series, int t1, int k, int t2, const SNConfig& cfg);
double sn_stat(const TimeSeries& series, int t1, int k, int t2, const SNConfig& cfg);
MaxStatResult max_stat(const TimeSeries& series, int s, int e, const SNConfig& cfg,
                       Execution ex = Execution::serial);

}  // namespace snnot
