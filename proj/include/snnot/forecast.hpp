#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snnot/calibration.hpp"
#include "snnot/regression.hpp"

namespace snnot {

enum class Family { linear, quadratic, logistic };

const char* to_string(Family f) noexcept;

// f(x) = L / (1 + exp(-alpha (x - t0))) with x = t/n.
struct LogisticParams {
    double L = 0.0;
    double alpha = 0.0;
    double t0 = 0.0;
};

double logistic_value(const LogisticParams& q, double x) noexcept;
// (df/dL, df/dalpha, df/dt0) at x.
std::array<double, 3> logistic_gradient(const LogisticParams& q, double x) noexcept;

struct ExtrapolantFit {
    Family family = Family::linear;
    // (a, b), (c, d, e) or (L, alpha, t0).
    std::vector<double> parameters;
    int window_start = 0;
    int window_end = 0;
    int n = 0;
    bool converged = true;
    double sse = 0.0;
    int iterations = 0;

    double evaluate(double x) const;
};

struct LogisticOptions {
    int max_iterations = 500;
    double tolerance = 1e-10;  // relative SSE improvement
    int restarts = 5;
    std::uint64_t seed = 1;
};

// OLS on abscissa t/n over [start, n] for linear and quadratic; damped
// Gauss-Newton for logistic. A logistic fit that does not converge comes back
// with converged = false and the best parameters seen.
ExtrapolantFit fit_extrapolant(const TimeSeries& series, int start, Family family, const LogisticOptions& lo = {});

// Levenberg-Marquardt from a given start, no restarts.
ExtrapolantFit fit_logistic_from(const TimeSeries& series, int start, const LogisticParams& init,
                                 const LogisticOptions& lo = {});

// Heuristic starting point on [start, n].
LogisticParams logistic_initial_guess(const TimeSeries& series, int start);

struct ForecastResult {
    int k = 0;
    double y_hat = 0.0;
    double count_hat = 0.0;  // exp(y_hat)
    double count_rounded = 0.0;  // half-up to an integer
    Family family = Family::linear;
    std::optional<double> relative_error;  // (count_rounded - truth) / truth
};

// Evaluates the fit at abscissa 1 + k/n.
ForecastResult forecast_k(const ExtrapolantFit& fit, int n, int k);

void attach_truth(ForecastResult& r, double truth);

// snl/snq/snlg fit the last detected segment; logistic fits the whole series.
enum class Method { snl, snq, snlg, logistic };

const char* to_string(Method m) noexcept;
Family family_of(Method m) noexcept;

struct PipelineResult {
    Method method = Method::snl;
    std::optional<DetectRun> detection;  // empty for the whole-series baseline
    ExtrapolantFit fit;
    ForecastResult forecast;
    bool fell_back = false;  // logistic did not converge, quadratic used
    std::vector<std::string> warnings;
};

PipelineResult forecast_pipeline(const TimeSeries& series, const DetectOptions& detect_opts, Method method, int k,
                                 Execution ex = Execution::parallel);

}  // namespace snnot
