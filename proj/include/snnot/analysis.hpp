#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snnot/regression.hpp"

namespace snnot {

struct SegmentFit {
    int start = 0;
    int end = 0;
    PolyCoefficients coefficients;
    // Mean daily increment (f(end/n) - f(start/n)) / (end - start) of the
    // fitted trend; b/n for a linear fit. Zero for a one-point segment.
    double normalized_slope = 0.0;
    // Set when the segment had fewer than p+2 points and got a constant fit.
    bool degenerate = false;
    std::string warning;

    int length() const noexcept { return end - start + 1; }
};

// OLS of order p on [1, tau_1], [tau_1 + 1, tau_2], ..., [tau_m + 1, n].
std::vector<SegmentFit> fit_segments(const TimeSeries& series, const std::vector<int>& tau_hat, int p);

// Within-segment residuals concatenated in time order.
std::vector<double> pooled_residuals(const TimeSeries& series, const std::vector<SegmentFit>& fits);

struct CountrySummary {
    double s_first = 0.0;  // slope of the segment before the first change-point
    double s_max = 0.0;
    double s_cur = 0.0;
    std::optional<double> ratio;  // empty when s_max == 0
    int max_segment = 0;          // 0-based; first one on ties
    int days_between = 0;         // start of last segment - start of max-slope segment
    std::optional<double> rho_hat;  // empty when residuals are constant or too short
};

CountrySummary country_summary(const std::vector<SegmentFit>& fits, const std::vector<double>& residuals);

struct Correlogram {
    std::vector<double> acf;   // lags 1..max_lag
    std::vector<double> pacf;  // lags 1..max_lag
};

// Mean-centred sample ACF with denominator n and PACF by Durbin-Levinson.
// Throws ArgumentError unless size > max_lag >= 1 and the sample varies.
Correlogram acf_pacf(const std::vector<double>& residuals, int max_lag = 30);

}  // namespace snnot
