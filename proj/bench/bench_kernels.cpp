// Serial reference against the OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "snnot/calibration.hpp"
#include "snnot/segmentation.hpp"
#include "snnot/sn_statistic.hpp"

using namespace snnot;

namespace {

TimeSeries noise(int n) {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = z(gen);
    return TimeSeries(v);
}

Execution mode(const benchmark::State& st) { return st.range(0) ? Execution::parallel : Execution::serial; }

void BM_MaxStat(benchmark::State& st) {
    const auto y = noise(1000);
    const SnStatistic sn(y, SNConfig{});
    for (auto _ : st) benchmark::DoNotOptimize(sn.max_stat(1, 1000, mode(st)));
}
BENCHMARK(BM_MaxStat)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ScoreIntervals(benchmark::State& st) {
    const auto y = noise(500);
    const SNConfig cfg;
    const SnStatistic sn(y, cfg);
    const auto set = sample_intervals(500, 300, cfg.h(500), 3);
    for (auto _ : st) benchmark::DoNotOptimize(score_intervals(sn, set, mode(st)));
}
BENCHMARK(BM_ScoreIntervals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_NullQuantiles(benchmark::State& st) {
    QuantileRequest req;
    req.replications = 64;
    req.grid_n = 500;
    for (auto _ : st) benchmark::DoNotOptimize(null_max_stats(req, 1, mode(st)));
}
BENCHMARK(BM_NullQuantiles)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ThresholdReplicates(benchmark::State& st) {
    const SNConfig cfg;
    const ThresholdRequest req{100, sample_intervals(100, 300, cfg.h(100), 4), 50, 0.95};
    for (auto _ : st) benchmark::DoNotOptimize(threshold_replicates(req, cfg, 1, mode(st)));
}
BENCHMARK(BM_ThresholdReplicates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
