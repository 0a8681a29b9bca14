#include "snnot/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "snnot/calibration.hpp"
#include "snnot/errors.hpp"
#include "snnot/rng.hpp"
#include "snnot/segmentation.hpp"

namespace snnot {

namespace {

// Adding 0.0 maps -0.0 to +0.0 so both spell the same key.
std::uint64_t rho_key(double rho) { return std::bit_cast<std::uint64_t>(rho + 0.0); }

void check_cps(const std::vector<int>& cps, int n, const char* what) {
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] < 1 || cps[i] >= n || (i > 0 && cps[i] <= cps[i - 1])) {
            throw ArgumentError(std::string(what) + " change-points must be increasing and inside [1, n)");
        }
    }
}

double pairs(double m) { return 0.5 * m * (m - 1.0); }

}  // namespace

std::vector<double> gen_ar1(int n, const AR1Spec& spec, std::mt19937_64& gen) {
    if (n < 1) throw ArgumentError("AR(1) length must be positive");
    if (!(std::abs(spec.rho) < 1.0)) throw ArgumentError("AR(1) coefficient must satisfy |rho| < 1");
    if (!(spec.sigma > 0.0)) throw ArgumentError("AR(1) sigma must be positive");
    std::normal_distribution<double> nd;
    const double innov = spec.sigma * std::sqrt(1.0 - spec.rho * spec.rho);
    std::vector<double> u(static_cast<std::size_t>(n));
    u[0] = spec.sigma * nd(gen);
    for (std::size_t t = 1; t < u.size(); ++t) u[t] = spec.rho * u[t - 1] + innov * nd(gen);
    return u;
}

std::vector<double> gen_ar1(int n, const AR1Spec& spec, std::uint64_t seed) {
    auto gen = substream(seed, 0, Stream::simulation, rho_key(spec.rho));
    return gen_ar1(n, spec, gen);
}

void PiecewiseTrendSpec::validate() const {
    if (n < 1) throw ArgumentError("trend length must be positive");
    if (coefficients.size() != breakpoints.size() + 1) {
        throw ArgumentError("need one coefficient vector per segment");
    }
    check_cps(breakpoints, n, "trend");
    for (std::size_t i = 1; i < coefficients.size(); ++i) {
        if (std::ranges::equal(coefficients[i].coeffs(), coefficients[i - 1].coeffs())) {
            throw ArgumentError("adjacent segments share coefficients at break " + std::to_string(breakpoints[i - 1]));
        }
    }
}

double PiecewiseTrendSpec::mean(int t) const {
    if (t < 1 || t > n) throw ArgumentError("time index outside [1, n]");
    const auto seg = static_cast<std::size_t>(std::lower_bound(breakpoints.begin(), breakpoints.end(), t) -
                                              breakpoints.begin());
    return coefficients[seg].evaluate(static_cast<double>(t) / n);
}

PiecewiseTrendSpec four_segment_spec() {
    return {{20, 40, 70},
            {PolyCoefficients({3.0, 3.2}), PolyCoefficients({5.8, 1.8}), PolyCoefficients({9.8, 0.8}),
             PolyCoefficients({15.05, 0.05})},
            100};
}

TimeSeries gen_piecewise(const PiecewiseTrendSpec& spec, std::span<const double> errors) {
    spec.validate();
    if (static_cast<int>(errors.size()) != spec.n) {
        throw ArgumentError("error sequence has length " + std::to_string(errors.size()) + ", expected " +
                            std::to_string(spec.n));
    }
    std::vector<double> y(errors.begin(), errors.end());
    for (int t = 1; t <= spec.n; ++t) y[static_cast<std::size_t>(t - 1)] += spec.mean(t);
    return TimeSeries(std::move(y));
}

HausdorffDistances hausdorff(const std::vector<int>& true_cps, const std::vector<int>& est_cps, int n) {
    if (n < 1) throw ArgumentError("n must be positive");
    if (true_cps.empty() && est_cps.empty()) return {};
    const double sentinel = n;
    // max over `from` of the distance to the nearest point of `to`; a min over
    // an empty set is the sentinel and a max over an empty set is zero.
    auto directed = [&](const std::vector<int>& from, const std::vector<int>& to) {
        double worst = 0.0;
        for (int a : from) {
            double best = sentinel;
            for (int b : to) best = std::min(best, static_cast<double>(std::abs(a - b)));
            worst = std::max(worst, best);
        }
        return worst;
    };
    HausdorffDistances out;
    out.d1 = directed(est_cps, true_cps);
    out.d2 = directed(true_cps, est_cps);
    out.dH = std::max(out.d1, out.d2);
    return out;
}

double adjusted_rand_index(const std::vector<int>& cps_a, const std::vector<int>& cps_b, int n) {
    if (n < 2) throw ArgumentError("ARI needs n >= 2");
    check_cps(cps_a, n, "first");
    check_cps(cps_b, n, "second");
    const auto sa = segments_from(cps_a, n);
    const auto sb = segments_from(cps_b, n);

    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& a : sa) sum_a += pairs(a.length());
    for (const auto& b : sb) sum_b += pairs(b.length());
    for (const auto& a : sa) {
        for (const auto& b : sb) {
            const int overlap = std::min(a.e, b.e) - std::max(a.s, b.s) + 1;
            if (overlap > 1) sum_ij += pairs(overlap);
        }
    }
    const double total = pairs(n);
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    // Zero only when both partitions are all-one-segment or all-singletons.
    if (denom == 0.0) return 1.0;
    return (sum_ij - expected) / denom;
}

SizePowerTable run_size_power(int n, const std::vector<double>& rhos, const std::vector<double>& alphas,
                              int replications, std::uint64_t seed, Execution ex) {
    const SNConfig cfg;
    if (replications < 1) throw ArgumentError("replications must be at least 1");
    if (n < 2 * cfg.h(n) || cfg.h(n) < 1) throw ConfigurationError("n too short for the default trimming");
    std::vector<double> critical;
    for (double a : alphas) {
        const auto cv = published_quantile(cfg.epsilon, cfg.delta, 1.0 - a);
        if (!cv) throw ConfigurationError("no published critical value at alpha = " + std::to_string(a));
        critical.push_back(*cv);
    }

    const double nn = n;
    const PolyCoefficients null_beta({3.0, 0.05 * nn});
    const PiecewiseTrendSpec alt{{n / 2}, {PolyCoefficients({3.0, 0.06 * nn}),
                                           PolyCoefficients({3.0 + 0.015 * nn, 0.03 * nn})}, n};
    alt.validate();

    SizePowerTable table{n, replications, seed, {}};
    std::vector<std::vector<double>> null_g(rhos.size()), alt_g(rhos.size());
    for (std::size_t r = 0; r < rhos.size(); ++r) {
        const AR1Spec spec{rhos[r], 0.15};
        auto& g0 = null_g[r];
        auto& g1 = alt_g[r];
        g0.assign(static_cast<std::size_t>(replications), 0.0);
        g1.assign(static_cast<std::size_t>(replications), 0.0);
        [[maybe_unused]] const bool par = ex == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
        for (int b = 0; b < replications; ++b) {
            auto gen = substream(seed, static_cast<std::uint64_t>(b), Stream::simulation, rho_key(spec.rho));
            const auto u = gen_ar1(n, spec, gen);
            std::vector<double> y0(u), y1(u);
            for (int t = 1; t <= n; ++t) {
                y0[static_cast<std::size_t>(t - 1)] += null_beta.evaluate(t / nn);
                y1[static_cast<std::size_t>(t - 1)] += alt.mean(t);
            }
            const auto r0 = SnStatistic(y0, cfg).try_max_stat(1, n);
            const auto r1 = SnStatistic(y1, cfg).try_max_stat(1, n);
            g0[static_cast<std::size_t>(b)] = r0 ? r0->statistic : 0.0;
            g1[static_cast<std::size_t>(b)] = r1 ? r1->statistic : 0.0;
        }
    }

    for (std::size_t a = 0; a < alphas.size(); ++a) {
        for (std::size_t r = 0; r < rhos.size(); ++r) {
            SizePowerCell cell;
            cell.alpha = alphas[a];
            cell.rho = rhos[r];
            cell.critical_value = critical[a];
            cell.null_quantile = sample_quantile(null_g[r], 1.0 - alphas[a]);
            const double reps = replications;
            cell.size = std::count_if(null_g[r].begin(), null_g[r].end(),
                                      [&](double g) { return g > cell.critical_value; }) / reps;
            cell.power = std::count_if(alt_g[r].begin(), alt_g[r].end(),
                                       [&](double g) { return g > cell.null_quantile; }) / reps;
            table.cells.push_back(cell);
        }
    }
    return table;
}

MultiCpTable run_multi_cp(int replications, const std::vector<double>& rhos, std::uint64_t seed,
                          const MultiCpOptions& opts, Execution ex) {
    if (replications < 1) throw ArgumentError("replications must be at least 1");
    opts.cfg.validate();
    const auto spec = four_segment_spec();
    const int n = spec.n;
    const int h = opts.cfg.h(n);
    const NullStatisticBank bank(n, opts.cfg, opts.B, seed, ex);
    std::vector<RandomIntervalSet> sets(static_cast<std::size_t>(replications));
    std::vector<double> zetas(sets.size());
    {
        [[maybe_unused]] const bool par = ex == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
        for (int b = 0; b < replications; ++b) {
            const auto i = static_cast<std::size_t>(b);
            sets[i] = sample_intervals(n, opts.M, h, seed, static_cast<std::uint64_t>(b));
            zetas[i] = bank.threshold(sets[i], opts.level);
        }
    }

    MultiCpTable table{replications, seed, 0.0, {}};
    for (double z : zetas) table.mean_zeta += z / replications;
    const int m_true = static_cast<int>(spec.breakpoints.size());
    for (double rho : rhos) {
        const AR1Spec ar{rho, opts.sigma};
        std::vector<double> ari(static_cast<std::size_t>(replications));
        std::vector<HausdorffDistances> dist(ari.size());
        std::vector<int> m_hat(ari.size());
        [[maybe_unused]] const bool par = ex == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
        for (int b = 0; b < replications; ++b) {
            const auto i = static_cast<std::size_t>(b);
            auto gen = substream(seed, static_cast<std::uint64_t>(b), Stream::simulation, rho_key(rho));
            const auto y = gen_piecewise(spec, gen_ar1(n, ar, gen));
            const SnStatistic sn(y, opts.cfg);
            const auto res = sn_not(score_intervals(sn, sets[i], Execution::serial), sets[i], zetas[i]);
            ari[i] = adjusted_rand_index(spec.breakpoints, res.tau_hat, n);
            dist[i] = hausdorff(spec.breakpoints, res.tau_hat, n);
            m_hat[i] = res.m_hat;
        }
        MultiCpRow row;
        row.rho = rho;
        const double reps = replications;
        for (std::size_t i = 0; i < ari.size(); ++i) {
            row.ari += ari[i] / reps;
            row.d1 += dist[i].d1 / reps;
            row.d2 += dist[i].d2 / reps;
            row.dH += dist[i].dH / reps;
            const int off = std::abs(m_hat[i] - m_true);
            (off == 0 ? row.m_exact : off == 1 ? row.m_off_one : row.m_off_more) += 1.0 / reps;
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_csv(std::ostream& os, const SizePowerTable& table) {
    os << "measure,alpha,n,rho,value,critical_value\n";
    os << std::setprecision(6);
    for (const auto& c : table.cells) {
        os << "size," << c.alpha << ',' << table.n << ',' << c.rho << ',' << c.size << ',' << c.critical_value << '\n';
    }
    for (const auto& c : table.cells) {
        os << "power," << c.alpha << ',' << table.n << ',' << c.rho << ',' << c.power << ',' << c.null_quantile
           << '\n';
    }
}

void write_csv(std::ostream& os, const MultiCpTable& table) {
    os << "metric";
    os << std::setprecision(6);
    for (const auto& r : table.rows) os << ',' << r.rho;
    os << '\n';
    auto line = [&](const char* name, double MultiCpRow::*field) {
        os << name;
        for (const auto& r : table.rows) os << ',' << r.*field;
        os << '\n';
    };
    line("ARI", &MultiCpRow::ari);
    line("d1", &MultiCpRow::d1);
    line("d2", &MultiCpRow::d2);
    line("dH", &MultiCpRow::dH);
    line("m_hat=3", &MultiCpRow::m_exact);
    line("|m_hat-3|=1", &MultiCpRow::m_off_one);
    line("|m_hat-3|>1", &MultiCpRow::m_off_more);
}

}  // namespace snnot
