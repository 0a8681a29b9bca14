#include "snnot/window_fitter.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "snnot/errors.hpp"

namespace snnot {

LocalMoments::LocalMoments(int p, int max_width)
    : p_(p), q_(p + 1), max_width_(max_width),
      inv_(static_cast<std::size_t>(max_width + 1) * (p + 1) * (p + 1), 0.0),
      ok_(static_cast<std::size_t>(max_width + 1), 0) {
    const int q = q_;
    std::vector<long double> sums(static_cast<std::size_t>(2 * p + 1));
    for (int w = 1; w <= max_width; ++w) {
        std::fill(sums.begin(), sums.end(), 0.0L);
        const long double half = 0.5L * (w - 1);
        for (int u = 0; u < w; ++u) {
            const long double z = (u - half) / w;
            long double zp = 1.0L;
            for (int e = 0; e <= 2 * p; ++e) {
                sums[static_cast<std::size_t>(e)] += zp;
                zp *= z;
            }
        }
        Matrix m(q, q);
        for (int r = 0; r < q; ++r)
            for (int c = 0; c < q; ++c) m(r, c) = static_cast<double>(sums[static_cast<std::size_t>(r + c)]);

        double* dst = inv_.data() + static_cast<std::size_t>(w) * q * q;
        bool ok = true;
        for (int c = 0; c < q && ok; ++c) {
            std::vector<double> e(static_cast<std::size_t>(q), 0.0);
            e[static_cast<std::size_t>(c)] = 1.0;
            auto col = solve_pivoted(m, std::move(e));
            if (!col) {
                ok = false;
                break;
            }
            for (int r = 0; r < q; ++r) dst[r * q + c] = (*col)[static_cast<std::size_t>(r)];
        }
        ok_[static_cast<std::size_t>(w)] = ok ? 1 : 0;
    }
}

std::shared_ptr<const LocalMoments> LocalMoments::get(int p, int max_width) {
    if (p < 0 || p > kMaxOrder) {
        throw ArgumentError("polynomial order " + std::to_string(p) + " outside [0, " +
                            std::to_string(kMaxOrder) + "]");
    }
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const LocalMoments>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[p];
    if (!slot || slot->max_width() < max_width) {
        slot = std::make_shared<const LocalMoments>(p, std::max(max_width, 16));
    }
    return slot;
}

WindowFitter::WindowFitter(std::span<const double> y, int p)
    : n_(static_cast<int>(y.size())), p_(p) {
    if (n_ < 1) throw ArgumentError("WindowFitter: empty series");
    moments_ = LocalMoments::get(p, n_);
    const int q = p + 1;

    for (double v : y) data_scale_ = std::max(data_scale_, std::abs(v));
    std::vector<double> detrended(y.begin(), y.end());
    if (n_ >= p + 2) {
        trend_ = ols_fit(TimeSeries(std::vector<double>(y.begin(), y.end())), 1, n_, p);
        for (int t = 1; t <= n_; ++t) {
            detrended[static_cast<std::size_t>(t - 1)] -= trend_.evaluate(static_cast<double>(t) / n_);
        }
    } else {
        trend_ = PolyCoefficients(std::vector<double>(static_cast<std::size_t>(q), 0.0));
    }

    prefix_.assign(static_cast<std::size_t>(n_ + 1) * q, 0.0);
    for (int t = 1; t <= n_; ++t) {
        const double x = static_cast<double>(t) / n_;
        double xp = 1.0;
        const double yt = detrended[static_cast<std::size_t>(t - 1)];
        for (int k = 0; k < q; ++k) {
            prefix_[static_cast<std::size_t>(t) * q + k] = prefix_[static_cast<std::size_t>(t - 1) * q + k] + xp * yt;
            xp *= x;
        }
    }
}

void WindowFitter::fit_detrended(int i, int j, std::span<double> out) const {
    if (i < 1 || j > n_ || i > j) {
        throw ArgumentError("window [" + std::to_string(i) + ", " + std::to_string(j) + "] outside series");
    }
    if (static_cast<int>(out.size()) != p_ + 1) throw ArgumentError("output size must be p+1");
    if (!solvable(j - i + 1)) {
        throw DegenerateWindowError("window [" + std::to_string(i) + ", " + std::to_string(j) +
                                    "] has a singular design");
    }
    switch (p_) {
        case 0: fit_detrended<1>(i, j, out.data()); break;
        case 1: fit_detrended<2>(i, j, out.data()); break;
        case 2: fit_detrended<3>(i, j, out.data()); break;
        case 3: fit_detrended<4>(i, j, out.data()); break;
        default: throw ArgumentError("unsupported order");
    }
}

PolyCoefficients WindowFitter::fit(int i, int j) const {
    std::vector<double> beta(static_cast<std::size_t>(p_ + 1));
    fit_detrended(i, j, beta);
    for (int k = 0; k <= p_; ++k) beta[static_cast<std::size_t>(k)] += trend_[static_cast<std::size_t>(k)];
    return PolyCoefficients(std::move(beta));
}

}  // namespace snnot
