#include "snnot/sn_statistic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "snnot/errors.hpp"

namespace snnot {

void SNConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw ConfigurationError("epsilon must lie in (0, 1/2), got " + std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < epsilon / 2.0)) {
        throw ConfigurationError("delta must satisfy 0 < delta < epsilon/2, got " + std::to_string(delta));
    }
    if (p < 1 || p > kMaxOrder) {
        throw ConfigurationError("order p must lie in [1, " + std::to_string(kMaxOrder) + "]");
    }
}

int SNConfig::h(int n) const noexcept { return static_cast<int>(std::floor(epsilon * n + 1e-9)); }
int SNConfig::d(int n) const noexcept { return static_cast<int>(std::floor(delta * n + 1e-9)); }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Range {
    int lo;
    int hi;
    bool empty() const noexcept { return lo > hi; }
};

// Summation ranges of L and R. Every subsample window keeps at least p+2
// points, which only tightens the bounds when d = 0.
Range left_range(int t1, int k, int p, int d) noexcept {
    return {std::max(t1 + p + d, t1 + p + 1), std::min(k - p - 1 - d, k - p - 2)};
}
Range right_range(int k, int t2, int p, int d) noexcept {
    return {std::max(k + 2 + p + d, k + p + 3), std::min(t2 - p - d, t2 - p - 1)};
}

template <int Q>
using Vec = std::array<double, Q>;
template <int Q>
using Mat = std::array<double, Q * Q>;

// Accumulates D and V for one (t1, k, t2). left(i, out) must return
// beta_{t1,i} and right(i, out) beta_{i,t2}, both detrended.
template <int Q, class LeftFit, class RightFit>
void accumulate(const WindowFitter& f, int t1, int k, int t2, int d, LeftFit&& left, RightFit&& right,
                Vec<Q>& contrast, Mat<Q>& v) {
    constexpr int p = Q - 1;
    const double len = t2 - t1 + 1;
    const double len2 = len * len;

    Vec<Q> a{};
    Vec<Q> b{};
    left(k, a.data());
    right(k + 1, b.data());
    const double scale = (k - t1 + 1.0) * (t2 - k) / (len * std::sqrt(len));
    for (int r = 0; r < Q; ++r) contrast[r] = scale * (a[r] - b[r]);

    v.fill(0.0);
    const Range lr = left_range(t1, k, p, d);
    const double ldenom = (k - t1 + 1.0) * (k - t1 + 1.0) * len2;
    for (int i = lr.lo; i <= lr.hi; ++i) {
        left(i, a.data());
        f.template fit_detrended<Q>(i + 1, k, b.data());
        const double wl = (i - t1 + 1.0) * (k - i);
        const double wt = wl * wl / ldenom;
        Vec<Q> diff;
        for (int r = 0; r < Q; ++r) diff[r] = a[r] - b[r];
        for (int r = 0; r < Q; ++r)
            for (int c = r; c < Q; ++c) v[r * Q + c] += wt * diff[r] * diff[c];
    }
    const Range rr = right_range(k, t2, p, d);
    const double rdenom = len2 * (t2 - k) * (t2 - k);
    for (int i = rr.lo; i <= rr.hi; ++i) {
        right(i, a.data());
        f.template fit_detrended<Q>(k + 1, i - 1, b.data());
        const double wr = (i - 1.0 - k) * (t2 - i + 1);
        const double wt = wr * wr / rdenom;
        Vec<Q> diff;
        for (int r = 0; r < Q; ++r) diff[r] = a[r] - b[r];
        for (int r = 0; r < Q; ++r)
            for (int c = r; c < Q; ++c) v[r * Q + c] += wt * diff[r] * diff[c];
    }
    for (int r = 0; r < Q; ++r)
        for (int c = 0; c < r; ++c) v[r * Q + c] = v[c * Q + r];
}

// V counts as numerically zero when its entries are no larger than the
// square of this fraction of the data scale; an exact polynomial leaves only
// rounding residue of that size.
constexpr double kNumericalZero = 1e-9;

// D^T V^{-1} D via a pivoted solve of V x = D. False when V is singular.
template <int Q>
bool quadratic_form(const Vec<Q>& contrast, Mat<Q> v, double zero_level, double& out) {
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (!(scale > zero_level)) return false;
    const double tol = kSingularPivotTolerance * scale;
    Vec<Q> x = contrast;
    for (int col = 0; col < Q; ++col) {
        int piv = col;
        for (int r = col + 1; r < Q; ++r)
            if (std::abs(v[r * Q + col]) > std::abs(v[piv * Q + col])) piv = r;
        if (!(std::abs(v[piv * Q + col]) > tol)) return false;
        if (piv != col) {
            for (int c = 0; c < Q; ++c) std::swap(v[piv * Q + c], v[col * Q + c]);
            std::swap(x[piv], x[col]);
        }
        for (int r = col + 1; r < Q; ++r) {
            const double m = v[r * Q + col] / v[col * Q + col];
            for (int c = col; c < Q; ++c) v[r * Q + c] -= m * v[col * Q + c];
            x[r] -= m * x[col];
        }
    }
    for (int r = Q - 1; r >= 0; --r) {
        double acc = x[r];
        for (int c = r + 1; c < Q; ++c) acc -= v[r * Q + c] * x[c];
        x[r] = acc / v[r * Q + r];
    }
    double t = 0.0;
    for (int r = 0; r < Q; ++r) t += contrast[r] * x[r];
    out = t;
    return true;
}

bool candidate_feasible(int t1, int k, int t2, int p, int d) noexcept {
    return t1 <= k - (p + 1) && k + (p + 1) <= t2 &&
           (!left_range(t1, k, p, d).empty() || !right_range(k, t2, p, d).empty());
}

template <int Q>
void scan_kernel(const WindowFitter& f, int s, int e, int h, int d, Execution ex, double* out) {
    constexpr int p = Q - 1;
    const int k0 = s + h - 1;
    const int k1 = e - h;
    const int count = k1 - k0 + 1;

    // Anchored fits beta_{s,i} and beta_{i,e} are shared by every candidate.
    std::vector<Vec<Q>> anchored_left(static_cast<std::size_t>(e - s + 1));
    std::vector<Vec<Q>> anchored_right(static_cast<std::size_t>(e - s + 1));
    for (int i = s; i <= e; ++i) {
        if (f.solvable(i - s + 1)) f.template fit_detrended<Q>(s, i, anchored_left[static_cast<std::size_t>(i - s)].data());
        if (f.solvable(e - i + 1)) f.template fit_detrended<Q>(i, e, anchored_right[static_cast<std::size_t>(i - s)].data());
    }
    auto left = [&](int i, double* dst) {
        const auto& src = anchored_left[static_cast<std::size_t>(i - s)];
        for (int r = 0; r < Q; ++r) dst[r] = src[r];
    };
    auto right = [&](int i, double* dst) {
        const auto& src = anchored_right[static_cast<std::size_t>(i - s)];
        for (int r = 0; r < Q; ++r) dst[r] = src[r];
    };

    const double zero_level = std::pow(kNumericalZero * f.data_scale(), 2);
    const bool par = ex == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 4) if (par)
    for (int idx = 0; idx < count; ++idx) {
        const int k = k0 + idx;
        double t = kNaN;
        if (candidate_feasible(s, k, e, p, d)) {
            Vec<Q> contrast;
            Mat<Q> v;
            accumulate<Q>(f, s, k, e, d, left, right, contrast, v);
            double value;
            if (quadratic_form<Q>(contrast, v, zero_level, value)) t = value;
        }
        out[idx] = t;
    }
}

template <int Q>
void evaluate_fixed(const WindowFitter& f, int t1, int k, int t2, int d, std::vector<double>& contrast_out,
                    Matrix& v_out) {
    auto left = [&](int i, double* dst) { f.template fit_detrended<Q>(t1, i, dst); };
    auto right = [&](int i, double* dst) { f.template fit_detrended<Q>(i, t2, dst); };
    Vec<Q> contrast;
    Mat<Q> v;
    accumulate<Q>(f, t1, k, t2, d, left, right, contrast, v);
    contrast_out.assign(contrast.begin(), contrast.end());
    v_out = Matrix(Q, Q);
    for (int r = 0; r < Q; ++r)
        for (int c = 0; c < Q; ++c) v_out(r, c) = v[r * Q + c];
}

template <int Q>
double quad_dispatch(std::span<const double> contrast, const Matrix& v, double zero_level, bool& ok) {
    Vec<Q> c;
    Mat<Q> m;
    for (int r = 0; r < Q; ++r) {
        c[r] = contrast[static_cast<std::size_t>(r)];
        for (int j = 0; j < Q; ++j) m[r * Q + j] = v(r, j);
    }
    double t = 0.0;
    ok = quadratic_form<Q>(c, m, zero_level, t);
    return t;
}

}  // namespace

SnStatistic::SnStatistic(std::span<const double> values, SNConfig cfg)
    : cfg_(cfg), fitter_((cfg.validate(), values), cfg.p), h_(cfg.h(static_cast<int>(values.size()))),
      d_(cfg.d(static_cast<int>(values.size()))) {}

void SnStatistic::check_contrast_window(int t1, int k, int t2) const {
    const int p = cfg_.p;
    if (t1 < 1 || t2 > n() || !(t1 <= k - (p + 1)) || !(k + (p + 1) <= t2)) {
        throw DegenerateWindowError("contrast windows infeasible for (t1, k, t2) = (" + std::to_string(t1) + ", " +
                                    std::to_string(k) + ", " + std::to_string(t2) + ")");
    }
}

std::vector<double> SnStatistic::contrast(int t1, int k, int t2) const {
    check_contrast_window(t1, k, t2);
    const double len = t2 - t1 + 1;
    const double scale = (k - t1 + 1.0) * (t2 - k) / (len * std::sqrt(len));
    std::vector<double> a(static_cast<std::size_t>(cfg_.p + 1));
    std::vector<double> b(a.size());
    fitter_.fit_detrended(t1, k, a);
    fitter_.fit_detrended(k + 1, t2, b);
    for (std::size_t r = 0; r < a.size(); ++r) a[r] = scale * (a[r] - b[r]);
    return a;
}

void SnStatistic::compute(int t1, int k, int t2, std::vector<double>& contrast_out, Matrix& v_out) const {
    check_contrast_window(t1, k, t2);
    const int p = cfg_.p;
    if (left_range(t1, k, p, d_).empty() && right_range(k, t2, p, d_).empty()) {
        throw InfeasibleCandidateError("self-normalizer summation ranges both empty at k=" + std::to_string(k));
    }
    switch (p) {
        case 1: evaluate_fixed<2>(fitter_, t1, k, t2, d_, contrast_out, v_out); break;
        case 2: evaluate_fixed<3>(fitter_, t1, k, t2, d_, contrast_out, v_out); break;
        case 3: evaluate_fixed<4>(fitter_, t1, k, t2, d_, contrast_out, v_out); break;
        default: throw ConfigurationError("unsupported order");
    }
}

Matrix SnStatistic::self_normalizer(int t1, int k, int t2) const {
    std::vector<double> unused;
    Matrix v;
    compute(t1, k, t2, unused, v);
    return v;
}

SNEvaluation SnStatistic::evaluate(int t1, int k, int t2) const {
    const int p = cfg_.p;
    SNEvaluation ev;
    ev.k = k;
    compute(t1, k, t2, ev.contrast, ev.normalizer);
    bool ok = false;
    const double zero_level = std::pow(kNumericalZero * fitter_.data_scale(), 2);
    switch (p) {
        case 1: ev.statistic = quad_dispatch<2>(ev.contrast, ev.normalizer, zero_level, ok); break;
        case 2: ev.statistic = quad_dispatch<3>(ev.contrast, ev.normalizer, zero_level, ok); break;
        default: ev.statistic = quad_dispatch<4>(ev.contrast, ev.normalizer, zero_level, ok); break;
    }
    if (!ok) {
        throw SingularNormalizerError(k, "self-normalizer singular at k=" + std::to_string(k));
    }
    return ev;
}

int SnStatistic::feasible_candidates(int s, int e) const noexcept {
    int count = 0;
    for (int k = std::max(s + h_ - 1, s); k <= e - h_; ++k) count += candidate_feasible(s, k, e, cfg_.p, d_) ? 1 : 0;
    return count;
}

std::vector<double> SnStatistic::scan(int s, int e, Execution ex) const {
    if (s < 1 || e > n() || s >= e) {
        throw ArgumentError("interval [" + std::to_string(s) + ", " + std::to_string(e) + "] outside series");
    }
    if (e - s + 1 < 2 * h_) {
        throw IntervalTooShortError("interval [" + std::to_string(s) + ", " + std::to_string(e) +
                                    "] shorter than 2h=" + std::to_string(2 * h_));
    }
    const int count = (e - h_) - (s + h_ - 1) + 1;
    std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)), kNaN);
    if (count <= 0) return out;
    switch (cfg_.p) {
        case 1: scan_kernel<2>(fitter_, s, e, h_, d_, ex, out.data()); break;
        case 2: scan_kernel<3>(fitter_, s, e, h_, d_, ex, out.data()); break;
        case 3: scan_kernel<4>(fitter_, s, e, h_, d_, ex, out.data()); break;
        default: throw ConfigurationError("unsupported order");
    }
    return out;
}

MaxStatResult SnStatistic::max_stat(int s, int e, Execution ex) const {
    const auto stats = scan(s, e, ex);
    const int best = first_argmax(stats);
    if (best < 0) {
        throw NoCandidateError("no usable candidate in [" + std::to_string(s) + ", " + std::to_string(e) + "]");
    }
    MaxStatResult res;
    res.candidates = static_cast<int>(stats.size());
    res.skipped = static_cast<int>(std::count_if(stats.begin(), stats.end(), [](double t) { return std::isnan(t); }));
    res.statistic = stats[static_cast<std::size_t>(best)];
    res.argmax = s + h_ - 1 + best;
    return res;
}

std::optional<MaxStatResult> SnStatistic::try_max_stat(int s, int e, Execution ex) const {
    try {
        return max_stat(s, e, ex);
    } catch (const IntervalTooShortError&) {
        return std::nullopt;
    } catch (const NoCandidateError&) {
        return std::nullopt;
    }
}

int first_argmax(std::span<const double> values) noexcept {
    int best = -1;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) continue;
        if (best < 0 || values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

std::vector<double> contrast(const TimeSeries& series, int t1, int k, int t2, const SNConfig& cfg) {
    return SnStatistic(series, cfg).contrast(t1, k, t2);
}

Matrix self_normalizer(const TimeSeries& series, int t1, int k, int t2, const SNConfig& cfg) {
    return SnStatistic(series, cfg).self_normalizer(t1, k, t2);
}

double sn_stat(const TimeSeries& series, int t1, int k, int t2, const SNConfig& cfg) {
    return SnStatistic(series, cfg).statistic(t1, k, t2);
}

MaxStatResult max_stat(const TimeSeries& series, int s, int e, const SNConfig& cfg, Execution ex) {
    return SnStatistic(series, cfg).max_stat(s, e, ex);
}

}  // namespace snnot
