#include "snnot/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "snnot/errors.hpp"
#include "snnot/rng.hpp"

namespace snnot {

namespace {

constexpr int kMinLogisticPoints = 5;

double sigmoid(double u) noexcept {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double z = std::exp(u);
    return z / (1.0 + z);
}

struct Window {
    std::vector<double> x;
    std::vector<double> y;
};

Window window_of(const TimeSeries& series, int start) {
    const int n = series.length();
    if (start < 1 || start > n) throw ArgumentError("window start outside the series");
    Window w;
    for (int t = start; t <= n; ++t) {
        w.x.push_back(static_cast<double>(t) / n);
        w.y.push_back(series.at(t));
    }
    return w;
}

double logistic_sse(const Window& w, const LogisticParams& q) {
    double sse = 0.0;
    for (std::size_t i = 0; i < w.x.size(); ++i) {
        const double r = w.y[i] - logistic_value(q, w.x[i]);
        sse += r * r;
    }
    return sse;
}

LogisticParams from_vector(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

// Converged fits first, then smaller SSE.
bool better(const ExtrapolantFit& a, const ExtrapolantFit& b) {
    if (a.converged != b.converged) return a.converged;
    return a.sse < b.sse;
}

}  // namespace

const char* to_string(Family f) noexcept {
    switch (f) {
        case Family::linear: return "linear";
        case Family::quadratic: return "quadratic";
        case Family::logistic: return "logistic";
    }
    return "?";
}

const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::snl: return "snl";
        case Method::snq: return "snq";
        case Method::snlg: return "snlg";
        case Method::logistic: return "logistic";
    }
    return "?";
}

Family family_of(Method m) noexcept {
    switch (m) {
        case Method::snl: return Family::linear;
        case Method::snq: return Family::quadratic;
        default: return Family::logistic;
    }
}

double logistic_value(const LogisticParams& q, double x) noexcept { return q.L * sigmoid(q.alpha * (x - q.t0)); }

std::array<double, 3> logistic_gradient(const LogisticParams& q, double x) noexcept {
    const double s = sigmoid(q.alpha * (x - q.t0));
    const double w = q.L * s * (1.0 - s);
    return {s, w * (x - q.t0), -w * q.alpha};
}

double ExtrapolantFit::evaluate(double x) const {
    if (family == Family::logistic) return logistic_value(from_vector(parameters), x);
    return PolyCoefficients(parameters).evaluate(x);
}

LogisticParams logistic_initial_guess(const TimeSeries& series, int start) {
    const auto w = window_of(series, start);
    const double ymax = *std::max_element(w.y.begin(), w.y.end());
    LogisticParams q;
    q.L = ymax > 0.0 ? 1.05 * ymax : 1.0;
    const double half = q.L / 2.0;
    for (std::size_t i = 1; i < w.y.size(); ++i) {
        if (w.y[i - 1] < half && w.y[i] >= half) {
            const double slope = (w.y[i] - w.y[i - 1]) / (w.x[i] - w.x[i - 1]);
            q.t0 = w.x[i - 1] + (half - w.y[i - 1]) / slope;
            q.alpha = 4.0 * slope / q.L;
            return q;
        }
    }
    // No half-max crossing: straight line through the logits.
    double sx = 0, sz = 0, sxx = 0, sxz = 0;
    int m = 0;
    for (std::size_t i = 0; i < w.y.size(); ++i) {
        if (!(w.y[i] > 0.0 && w.y[i] < q.L)) continue;
        const double z = std::log(w.y[i] / (q.L - w.y[i]));
        sx += w.x[i];
        sz += z;
        sxx += w.x[i] * w.x[i];
        sxz += w.x[i] * z;
        ++m;
    }
    const double den = m * sxx - sx * sx;
    if (m >= 2 && std::abs(den) > 0.0) {
        const double b = (m * sxz - sx * sz) / den;
        const double a = (sz - b * sx) / m;
        if (b != 0.0) {
            q.alpha = b;
            q.t0 = -a / b;
            return q;
        }
    }
    q.alpha = 1.0;
    q.t0 = 0.5 * (w.x.front() + w.x.back());
    return q;
}

ExtrapolantFit fit_logistic_from(const TimeSeries& series, int start, const LogisticParams& init,
                                 const LogisticOptions& lo) {
    const auto w = window_of(series, start);
    if (static_cast<int>(w.x.size()) < kMinLogisticPoints) {
        throw DegenerateWindowError("logistic fit needs at least 5 points");
    }
    double scale = 0.0;
    for (double v : w.y) scale += v * v;

    ExtrapolantFit fit;
    fit.family = Family::logistic;
    fit.window_start = start;
    fit.window_end = series.length();
    fit.n = series.length();
    fit.converged = false;

    LogisticParams q = init;
    double sse = logistic_sse(w, q);
    double lambda = 1e-3;
    int iter = 0;
    for (; iter < lo.max_iterations; ++iter) {
        if (sse <= 1e-28 * scale) {
            fit.converged = true;
            break;
        }
        Matrix a(3, 3);
        std::vector<double> g(3, 0.0);
        for (std::size_t i = 0; i < w.x.size(); ++i) {
            const auto j = logistic_gradient(q, w.x[i]);
            const double r = w.y[i] - logistic_value(q, w.x[i]);
            for (int u = 0; u < 3; ++u) {
                g[static_cast<std::size_t>(u)] += j[static_cast<std::size_t>(u)] * r;
                for (int v = 0; v < 3; ++v) a(u, v) += j[static_cast<std::size_t>(u)] * j[static_cast<std::size_t>(v)];
            }
        }
        const double diag_floor = 1e-12 * std::max({a(0, 0), a(1, 1), a(2, 2), 1e-300});

        bool accepted = false;
        double next_sse = sse;
        LogisticParams next = q;
        while (!accepted) {
            Matrix damped = a;
            for (int u = 0; u < 3; ++u) damped(u, u) += lambda * std::max(a(u, u), diag_floor);
            if (auto step = solve_pivoted(damped, g)) {
                next = {q.L + (*step)[0], q.alpha + (*step)[1], q.t0 + (*step)[2]};
                next_sse = next.L > 0.0 ? logistic_sse(w, next) : std::numeric_limits<double>::infinity();
                accepted = std::isfinite(next_sse) && next_sse < sse;
            }
            if (accepted) {
                lambda = std::max(lambda / 10.0, 1e-15);
            } else {
                lambda *= 10.0;
                // No damping finds a descent step: stationary up to rounding.
                if (lambda > 1e16) break;
            }
        }
        if (!accepted) {
            fit.converged = true;
            break;
        }
        const double improvement = (sse - next_sse) / sse;
        q = next;
        sse = next_sse;
        if (improvement < lo.tolerance) {
            fit.converged = true;
            ++iter;
            break;
        }
    }
    fit.iterations = iter;
    fit.parameters = {q.L, q.alpha, q.t0};
    fit.sse = sse;
    return fit;
}

ExtrapolantFit fit_extrapolant(const TimeSeries& series, int start, Family family, const LogisticOptions& lo) {
    if (family == Family::logistic) {
        const auto init = logistic_initial_guess(series, start);
        auto best = fit_logistic_from(series, start, init, lo);
        std::normal_distribution<double> jitter(0.0, 1.0);
        for (int r = 0; r < lo.restarts && !best.converged; ++r) {
            auto gen = substream(lo.seed, static_cast<std::uint64_t>(r), Stream::forecast_restarts);
            LogisticParams q = init;
            q.L *= std::exp(0.1 * jitter(gen));
            q.alpha *= std::exp(0.3 * jitter(gen));
            q.t0 += 0.05 * jitter(gen);
            auto cand = fit_logistic_from(series, start, q, lo);
            if (better(cand, best)) best = std::move(cand);
        }
        return best;
    }
    const int p = family == Family::linear ? 1 : 2;
    ExtrapolantFit fit;
    fit.family = family;
    fit.window_start = start;
    fit.window_end = series.length();
    fit.n = series.length();
    const auto c = ols_fit(series, start, series.length(), p);
    fit.parameters.assign(c.coeffs().begin(), c.coeffs().end());
    for (double r : segment_residuals(series, start, series.length(), c)) fit.sse += r * r;
    return fit;
}

ForecastResult forecast_k(const ExtrapolantFit& fit, int n, int k) {
    if (k < 0) throw ArgumentError("horizon must be nonnegative");
    if (n < 1) throw ArgumentError("n must be positive");
    ForecastResult r;
    r.k = k;
    r.family = fit.family;
    r.y_hat = fit.evaluate(1.0 + static_cast<double>(k) / n);
    r.count_hat = std::exp(r.y_hat);
    r.count_rounded = std::floor(r.count_hat + 0.5);
    return r;
}

void attach_truth(ForecastResult& r, double truth) {
    if (!(truth > 0.0)) throw ArgumentError("true count must be positive");
    r.relative_error = (r.count_rounded - truth) / truth;
}

PipelineResult forecast_pipeline(const TimeSeries& series, const DetectOptions& detect_opts, Method method, int k,
                                 Execution ex) {
    PipelineResult out;
    out.method = method;
    int start = 1;
    if (method != Method::logistic) {
        out.detection = detect(series, detect_opts, ex);
        const auto& tau = out.detection->result.tau_hat;
        if (!tau.empty()) start = tau.back() + 1;
    }
    LogisticOptions lo;
    lo.seed = detect_opts.seed;
    out.fit = fit_extrapolant(series, start, family_of(method), lo);
    if (out.fit.family == Family::logistic && !out.fit.converged) {
        out.warnings.push_back("logistic fit did not converge; quadratic used");
        out.fell_back = true;
        out.fit = fit_extrapolant(series, start, Family::quadratic);
    }
    out.forecast = forecast_k(out.fit, series.length(), k);
    return out;
}

}  // namespace snnot
