#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace snnot {

using Date = std::chrono::sys_days;

// Ordered real observations Y_1..Y_n with optional calendar labels.
//
// Positions are 1-based throughout the public API: change-points, windows and
// candidate indices all refer to t = 1..n, matching the way segment ends are
// reported.
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> values);
    TimeSeries(std::vector<double> values, std::vector<Date> labels);

    std::size_t size() const noexcept { return values_.size(); }
    int length() const noexcept { return static_cast<int>(values_.size()); }
    bool empty() const noexcept { return values_.empty(); }

    // 1-based access.
    double at(int t) const { return values_[static_cast<std::size_t>(t - 1)]; }

    std::span<const double> values() const noexcept { return values_; }
    bool has_labels() const noexcept { return !labels_.empty(); }
    const std::vector<Date>& labels() const noexcept { return labels_; }
    Date label(int t) const { return labels_.at(static_cast<std::size_t>(t - 1)); }

private:
    std::vector<double> values_;
    std::vector<Date> labels_;
};

// Coefficients (beta_0, ..., beta_p) on the basis (1, s, ..., s^p), intercept first.
class PolyCoefficients {
public:
    PolyCoefficients() = default;
    explicit PolyCoefficients(std::vector<double> coeffs);

    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    double operator[](std::size_t j) const { return coeffs_[j]; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }

    // Horner evaluation at abscissa s.
    double evaluate(double s) const noexcept;

private:
    std::vector<double> coeffs_;
};

using DesignRow = std::vector<double>;

// Dense row-major matrix for the (p+1)x(p+1) systems that show up everywhere.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    std::span<const double> data() const noexcept { return data_; }
    double max_abs() const noexcept;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Relative pivot threshold below which a system is declared singular.
inline constexpr double kSingularPivotTolerance = 1e-12;

// Solves A x = b by Gaussian elimination with partial pivoting. Returns
// nullopt when a pivot falls below kSingularPivotTolerance * max|A|.
std::optional<std::vector<double>> solve_pivoted(Matrix a, std::vector<double> b);

// (1, t/n, ..., (t/n)^p).
DesignRow design_row(int t, int n, int p);

// OLS of Y_t on F^{(p)}(t/n) over t = i..j, with n the full series length.
// Throws DegenerateWindowError when j - i + 1 < p + 2 or the system is singular.
PolyCoefficients ols_fit(const TimeSeries& series, int i, int j, int p);

// Y_t - fit(t/n) for t = i..j.
std::vector<double> segment_residuals(const TimeSeries& series, int i, int j,
                                      const PolyCoefficients& fit);

namespace detail {

// Binomial coefficient for the small orders used in basis changes.
double binomial(int m, int k) noexcept;

// Converts coefficients gamma on the local basis z = (t - c) / w into the
// global basis x = t / n, where c is the window centre and w its length.
void local_to_global(std::span<const double> gamma, double centre, double width, int n,
                     std::span<double> beta) noexcept;

}  // namespace detail

}  // namespace snnot
