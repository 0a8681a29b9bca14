#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "snnot/regression.hpp"

namespace snnot {

inline constexpr int kMaxOrder = 3;

// Inverses of the moment matrices sum_z F(z) F(z)^T of the centred unit-width
// basis z = (u - (w-1)/2) / w, u = 0..w-1, for every window length w. They do
// not depend on the data or on n, so one table per order is shared by all
// fitters.
class LocalMoments {
public:
    static std::shared_ptr<const LocalMoments> get(int p, int max_width);

    LocalMoments(int p, int max_width);

    int order() const noexcept { return p_; }
    int max_width() const noexcept { return max_width_; }
    bool invertible(int w) const noexcept { return w >= 1 && w <= max_width_ && ok_[static_cast<std::size_t>(w)]; }
    const double* inverse(int w) const noexcept { return inv_.data() + static_cast<std::size_t>(w) * q_ * q_; }

private:
    int p_;
    int q_;
    int max_width_;
    std::vector<double> inv_;
    std::vector<char> ok_;
};

// Subsample OLS from prefix cross-product accumulators: after O(n p) set-up
// each beta_hat_{i,j} costs O(p^2).
//
// The series is detrended by its full-sample polynomial fit before the
// prefix sums are formed. Every SN quantity is built from differences of
// subsample estimates, which the detrending leaves unchanged, while the prefix
// sums stay at noise scale and lose far less to cancellation.
class WindowFitter {
public:
    WindowFitter(std::span<const double> y, int p);

    int n() const noexcept { return n_; }
    int order() const noexcept { return p_; }
    int dim() const noexcept { return p_ + 1; }
    const PolyCoefficients& trend() const noexcept { return trend_; }
    // max |y_t| of the input series.
    double data_scale() const noexcept { return data_scale_; }

    // Whether a window of this length has a nonsingular design.
    bool solvable(int width) const noexcept { return moments_->invertible(width); }

    // Coefficients of the detrended series on [i, j]. No validation.
    template <int Q>
    void fit_detrended(int i, int j, double* out) const noexcept;

    void fit_detrended(int i, int j, std::span<double> out) const;

    // Coefficients of the original series on [i, j]; throws on a singular window.
    PolyCoefficients fit(int i, int j) const;

private:
    int n_;
    int p_;
    PolyCoefficients trend_;
    double data_scale_ = 0.0;
    std::shared_ptr<const LocalMoments> moments_;
    std::vector<double> prefix_;  // (n+1) x (p+1): sum_{u<=t} (u/n)^k y'_u
};

template <int Q>
inline void WindowFitter::fit_detrended(int i, int j, double* out) const noexcept {
    const double* hi = prefix_.data() + static_cast<std::size_t>(j) * Q;
    const double* lo = prefix_.data() + static_cast<std::size_t>(i - 1) * Q;
    const int w = j - i + 1;
    const double a = 0.5 * (i + j) / n_;
    const double g = static_cast<double>(n_) / w;

    std::array<double, Q> raw{};
    for (int k = 0; k < Q; ++k) raw[k] = hi[k] - lo[k];

    if constexpr (Q == 1) {
        out[0] = raw[0] / w;
    } else if constexpr (Q == 2) {
        const double* inv = moments_->inverse(w);
        const double r0 = raw[0];
        const double r1 = g * (raw[1] - a * raw[0]);
        const double c0 = inv[0] * r0 + inv[1] * r1;
        const double c1 = inv[2] * r0 + inv[3] * r1;
        out[1] = g * c1;
        out[0] = c0 - a * g * c1;
    } else {
        // T[m][k] = g^m C(m,k) (-a)^(m-k); local rhs = T raw, beta = T^T gamma.
        std::array<std::array<double, Q>, Q> tr{};
        double gm = 1.0;
        for (int m = 0; m < Q; ++m) {
            double am = 1.0;
            for (int k = m; k >= 0; --k) {
                tr[m][k] = gm * detail::binomial(m, k) * am;
                am *= -a;
            }
            gm *= g;
        }
        std::array<double, Q> local{};
        for (int m = 0; m < Q; ++m) {
            double acc = 0.0;
            for (int k = 0; k <= m; ++k) acc += tr[m][k] * raw[k];
            local[m] = acc;
        }
        const double* inv = moments_->inverse(w);
        std::array<double, Q> gamma{};
        for (int r = 0; r < Q; ++r) {
            double acc = 0.0;
            for (int c = 0; c < Q; ++c) acc += inv[r * Q + c] * local[c];
            gamma[r] = acc;
        }
        for (int k = 0; k < Q; ++k) {
            double acc = 0.0;
            for (int m = k; m < Q; ++m) acc += tr[m][k] * gamma[m];
            out[k] = acc;
        }
    }
}

}  // namespace snnot
