#include "snnot/analysis.hpp"

#include <cmath>
#include <numeric>

#include "snnot/errors.hpp"

namespace snnot {

std::vector<SegmentFit> fit_segments(const TimeSeries& series, const std::vector<int>& tau_hat, int p) {
    if (p < 0) throw ArgumentError("order must be nonnegative");
    const int n = series.length();
    std::vector<SegmentFit> out;
    int start = 1;
    for (std::size_t i = 0; i <= tau_hat.size(); ++i) {
        const int end = i < tau_hat.size() ? tau_hat[i] : n;
        if (end < start || end > n || (i < tau_hat.size() && end >= n)) {
            throw ArgumentError("change-points must be increasing and inside [1, n)");
        }
        SegmentFit fit;
        fit.start = start;
        fit.end = end;
        if (fit.length() >= p + 2) {
            fit.coefficients = ols_fit(series, start, end, p);
        } else {
            double mean = 0.0;
            for (int t = start; t <= end; ++t) mean += series.at(t);
            mean /= fit.length();
            std::vector<double> c(static_cast<std::size_t>(p + 1), 0.0);
            c[0] = mean;
            fit.coefficients = PolyCoefficients(std::move(c));
            fit.degenerate = true;
            fit.warning = "segment [" + std::to_string(start) + ", " + std::to_string(end) + "] has fewer than " +
                          std::to_string(p + 2) + " points; constant fit";
        }
        if (end > start) {
            const double rise = fit.coefficients.evaluate(static_cast<double>(end) / n) -
                                fit.coefficients.evaluate(static_cast<double>(start) / n);
            fit.normalized_slope = rise / (end - start);
        }
        out.push_back(std::move(fit));
        start = end + 1;
    }
    return out;
}

std::vector<double> pooled_residuals(const TimeSeries& series, const std::vector<SegmentFit>& fits) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(series.length()));
    for (const auto& f : fits) {
        const auto r = segment_residuals(series, f.start, f.end, f.coefficients);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

CountrySummary country_summary(const std::vector<SegmentFit>& fits, const std::vector<double>& residuals) {
    if (fits.empty()) throw ArgumentError("at least one segment required");
    CountrySummary s;
    s.s_first = fits.front().normalized_slope;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (i == 0 || fits[i].normalized_slope > s.s_max) {
            s.s_max = fits[i].normalized_slope;
            s.max_segment = static_cast<int>(i);
        }
    }
    s.s_cur = fits.back().normalized_slope;
    if (s.s_max != 0.0) s.ratio = s.s_cur / s.s_max;
    s.days_between = fits.back().start - fits[static_cast<std::size_t>(s.max_segment)].start;
    if (residuals.size() >= 2) {
        try {
            s.rho_hat = acf_pacf(residuals, 1).acf[0];
        } catch (const ArgumentError&) {
            // constant residuals: no autocorrelation to report
        }
    }
    return s;
}

Correlogram acf_pacf(const std::vector<double>& x, int max_lag) {
    const auto n = static_cast<int>(x.size());
    if (max_lag < 1 || n <= max_lag) {
        throw ArgumentError("need more than " + std::to_string(max_lag) + " residuals, got " + std::to_string(n));
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    std::vector<double> c(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) c[t] = x[t] - mean;
    double c0 = 0.0;
    for (double v : c) c0 += v * v;
    if (!(c0 > 0.0)) throw ArgumentError("residuals are constant");

    Correlogram out;
    out.acf.resize(static_cast<std::size_t>(max_lag));
    for (int k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (int t = 0; t + k < n; ++t) acc += c[static_cast<std::size_t>(t)] * c[static_cast<std::size_t>(t + k)];
        out.acf[static_cast<std::size_t>(k - 1)] = acc / c0;
    }

    // Durbin-Levinson: phi[k][k] is the lag-k partial autocorrelation.
    out.pacf.resize(out.acf.size());
    std::vector<double> phi, prev;
    for (int k = 1; k <= max_lag; ++k) {
        const double rk = out.acf[static_cast<std::size_t>(k - 1)];
        double num = rk, den = 1.0;
        for (int j = 1; j < k; ++j) {
            num -= prev[static_cast<std::size_t>(j - 1)] * out.acf[static_cast<std::size_t>(k - j - 1)];
            den -= prev[static_cast<std::size_t>(j - 1)] * out.acf[static_cast<std::size_t>(j - 1)];
        }
        const double pkk = num / den;
        phi.assign(static_cast<std::size_t>(k), 0.0);
        for (int j = 1; j < k; ++j) {
            phi[static_cast<std::size_t>(j - 1)] =
                prev[static_cast<std::size_t>(j - 1)] - pkk * prev[static_cast<std::size_t>(k - j - 1)];
        }
        phi[static_cast<std::size_t>(k - 1)] = pkk;
        out.pacf[static_cast<std::size_t>(k - 1)] = pkk;
        prev.swap(phi);
    }
    return out;
}

}  // namespace snnot
