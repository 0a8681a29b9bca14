#include "snnot/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snnot/errors.hpp"

namespace snnot {

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw ArgumentError("time series must contain at least one observation");
    }
    for (std::size_t t = 0; t < values_.size(); ++t) {
        if (!std::isfinite(values_[t])) {
            throw ArgumentError("time series value at t=" + std::to_string(t + 1) + " is not finite");
        }
    }
}

TimeSeries::TimeSeries(std::vector<double> values, std::vector<Date> labels)
    : TimeSeries(std::move(values)) {
    if (!labels.empty()) {
        if (labels.size() != values_.size()) {
            throw ArgumentError("label count does not match value count");
        }
        for (std::size_t t = 1; t < labels.size(); ++t) {
            if (labels[t] <= labels[t - 1]) {
                throw ArgumentError("labels must be strictly increasing");
            }
        }
    }
    labels_ = std::move(labels);
}

PolyCoefficients::PolyCoefficients(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        throw ArgumentError("polynomial needs at least an intercept");
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw ArgumentError("polynomial coefficient is not finite");
        }
    }
}

double PolyCoefficients::evaluate(double s) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

std::optional<std::vector<double>> solve_pivoted(Matrix a, std::vector<double> b) {
    const int n = a.rows();
    if (a.cols() != n || static_cast<int>(b.size()) != n) {
        throw ArgumentError("solve_pivoted: dimension mismatch");
    }
    const double scale = a.max_abs();
    if (scale == 0.0) return std::nullopt;
    const double tol = kSingularPivotTolerance * scale;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        }
        if (!(std::abs(a(piv, col)) > tol)) return std::nullopt;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) acc -= a(r, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = acc / a(r, r);
    }
    return x;
}

DesignRow design_row(int t, int n, int p) {
    if (p < 0) throw ArgumentError("design_row: order must be nonnegative");
    if (n < 1 || t < 1 || t > n) {
        throw ArgumentError("design_row: t=" + std::to_string(t) + " outside [1, " + std::to_string(n) + "]");
    }
    DesignRow row(static_cast<std::size_t>(p + 1));
    const double s = static_cast<double>(t) / static_cast<double>(n);
    row[0] = 1.0;
    for (int j = 1; j <= p; ++j) row[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j - 1)] * s;
    return row;
}

namespace detail {

double binomial(int m, int k) noexcept {
    if (k < 0 || k > m) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
    return r;
}

void local_to_global(std::span<const double> gamma, double centre, double width, int n,
                     std::span<double> beta) noexcept {
    const int q = static_cast<int>(gamma.size());
    const double a = centre / n;
    const double g = n / width;
    for (int k = 0; k < q; ++k) {
        double acc = 0.0;
        double gm = std::pow(g, k);
        double am = 1.0;  // (-a)^(m-k)
        for (int m = k; m < q; ++m) {
            acc += gamma[static_cast<std::size_t>(m)] * gm * binomial(m, k) * am;
            gm *= g;
            am *= -a;
        }
        beta[static_cast<std::size_t>(k)] = acc;
    }
}

}  // namespace detail

PolyCoefficients ols_fit(const TimeSeries& series, int i, int j, int p) {
    const int n = series.length();
    if (p < 0) throw ArgumentError("ols_fit: order must be nonnegative");
    if (i < 1 || j > n || i >= j) {
        throw ArgumentError("ols_fit: window [" + std::to_string(i) + ", " + std::to_string(j) +
                            "] invalid for n=" + std::to_string(n));
    }
    const int w = j - i + 1;
    if (w < p + 2) {
        throw DegenerateWindowError("ols_fit: window of length " + std::to_string(w) +
                                    " too short for order " + std::to_string(p));
    }
    // Normal equations on the centred, unit-width basis z = (t - c) / w keep the
    // system well conditioned for short windows far from the origin.
    const int q = p + 1;
    const double centre = 0.5 * (i + j);
    Matrix m(q, q);
    std::vector<double> rhs(static_cast<std::size_t>(q), 0.0);
    std::vector<double> pw(static_cast<std::size_t>(2 * p + 1));
    for (int t = i; t <= j; ++t) {
        const double z = (t - centre) / w;
        pw[0] = 1.0;
        for (int e = 1; e <= 2 * p; ++e) pw[static_cast<std::size_t>(e)] = pw[static_cast<std::size_t>(e - 1)] * z;
        const double y = series.at(t);
        for (int r = 0; r < q; ++r) {
            rhs[static_cast<std::size_t>(r)] += pw[static_cast<std::size_t>(r)] * y;
            for (int c = 0; c < q; ++c) m(r, c) += pw[static_cast<std::size_t>(r + c)];
        }
    }
    auto gamma = solve_pivoted(std::move(m), std::move(rhs));
    if (!gamma) {
        throw DegenerateWindowError("ols_fit: singular normal equations on [" + std::to_string(i) + ", " +
                                    std::to_string(j) + "]");
    }
    std::vector<double> beta(static_cast<std::size_t>(q));
    detail::local_to_global(*gamma, centre, w, n, beta);
    return PolyCoefficients(std::move(beta));
}

std::vector<double> segment_residuals(const TimeSeries& series, int i, int j, const PolyCoefficients& fit) {
    const int n = series.length();
    if (i < 1 || j > n || i > j) {
        throw ArgumentError("segment_residuals: window [" + std::to_string(i) + ", " + std::to_string(j) +
                            "] invalid for n=" + std::to_string(n));
    }
    if (fit.size() == 0) throw ArgumentError("segment_residuals: empty fit");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(j - i + 1));
    for (int t = i; t <= j; ++t) {
        out.push_back(series.at(t) - fit.evaluate(static_cast<double>(t) / n));
    }
    return out;
}

}  // namespace snnot
