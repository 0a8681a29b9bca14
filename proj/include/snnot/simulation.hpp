#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "snnot/regression.hpp"
#include "snnot/sn_statistic.hpp"

namespace snnot {

// u_t = rho u_{t-1} + e_t with e_t ~ N(0, (1 - rho^2) sigma^2), so the
// marginal variance is sigma^2 for every rho.
struct AR1Spec {
    double rho = 0.0;
    double sigma = 0.15;
};

// Stationary start u_1 ~ N(0, sigma^2). Throws ArgumentError unless |rho| < 1
// and sigma > 0.
std::vector<double> gen_ar1(int n, const AR1Spec& spec, std::mt19937_64& gen);
std::vector<double> gen_ar1(int n, const AR1Spec& spec, std::uint64_t seed);

// Piecewise polynomial mean in x = t / n. Segment i covers
// (breakpoints[i-1], breakpoints[i]].
struct PiecewiseTrendSpec {
    std::vector<int> breakpoints;
    std::vector<PolyCoefficients> coefficients;  // one more than breakpoints
    int n = 0;

    void validate() const;
    double mean(int t) const;
};

// Four segments with breaks at 20, 40, 70 and n = 100.
PiecewiseTrendSpec four_segment_spec();

TimeSeries gen_piecewise(const PiecewiseTrendSpec& spec, std::span<const double> errors);

struct HausdorffDistances {
    double d1 = 0.0;  // over-segmentation: max over estimated of distance to truth
    double d2 = 0.0;  // under-segmentation: max over true of distance to estimate
    double dH = 0.0;
};

// An empty set against a nonempty one gives dH = n; both empty give zeros.
HausdorffDistances hausdorff(const std::vector<int>& true_cps, const std::vector<int>& est_cps, int n);

// ARI of the partitions of 1..n induced by two change-point sets.
double adjusted_rand_index(const std::vector<int>& cps_a, const std::vector<int>& cps_b, int n);

struct SizePowerCell {
    double alpha = 0.05;
    double rho = 0.0;
    double size = 0.0;
    double power = 0.0;           // size-adjusted
    double critical_value = 0.0;  // published value used for size
    double null_quantile = 0.0;   // empirical 1 - alpha null quantile used for power
};

struct SizePowerTable {
    int n = 0;
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<SizePowerCell> cells;  // alpha-major, then rho
};

// Size under Y = 3 + 0.05 n (t/n) + u and size-adjusted power under a break
// at n/2 from (3, 0.06 n) to (3 + 0.015 n, 0.03 n), with sigma = 0.15.
// Null and alternative replicate b share their errors.
SizePowerTable run_size_power(int n, const std::vector<double>& rhos, const std::vector<double>& alphas,
                              int replications, std::uint64_t seed, Execution ex = Execution::parallel);

struct MultiCpRow {
    double rho = 0.0;
    double ari = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double dH = 0.0;
    double m_exact = 0.0;   // share with m_hat = 3
    double m_off_one = 0.0; // share with |m_hat - 3| = 1
    double m_off_more = 0.0;
};

struct MultiCpOptions {
    SNConfig cfg{};
    int M = 300;
    int B = 1000;
    double level = 0.95;
    double sigma = 0.15;
};

struct MultiCpTable {
    int replications = 0;
    std::uint64_t seed = 0;
    double mean_zeta = 0.0;
    std::vector<MultiCpRow> rows;
};

// Every replicate is its own analysis: a fresh interval set and its own
// threshold, looked up in one null bank of B replicates shared by the run.
// Replicate b uses the same interval set for every rho.
MultiCpTable run_multi_cp(int replications, const std::vector<double>& rhos, std::uint64_t seed,
                          const MultiCpOptions& opts = {}, Execution ex = Execution::parallel);

void write_csv(std::ostream& os, const SizePowerTable& table);
void write_csv(std::ostream& os, const MultiCpTable& table);

}  // namespace snnot
