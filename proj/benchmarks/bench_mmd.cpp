// Kernel-statistic hot paths: pairwise MMD sums and the bandwidth heuristic.

#include <benchmark/benchmark.h>

#include "criticbench/data/distributions.hpp"
#include "criticbench/metrics/mmd.hpp"

using namespace criticbench;

namespace {

data::SampleSet ring_draw(std::size_t n, std::uint64_t seed,
                          data::Role role = data::Role::kTrain) {
    const auto spec = data::DistributionSpec::gaussian_ring(8, 2.0, 0.2);
    return data::sample(spec, n, seed, role);
}

void BM_Mmd2Biased(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const data::SampleSet x = ring_draw(n, 1);
    const data::SampleSet s = ring_draw(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::mmd2_biased(x, s, 1.0));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Mmd2Biased)->Arg(256)->Arg(512)->Arg(1024);

void BM_MmdScoreFourSigmas(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const data::SampleSet x = ring_draw(n, 1);
    const data::SampleSet s = ring_draw(n, 2);
    const std::vector<double> sigmas = {0.5, 1.0, 2.0, 4.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::mmd_score(x, s, sigmas));
    }
}
BENCHMARK(BM_MmdScoreFourSigmas)->Arg(256)->Arg(512);

void BM_MedianHeuristic(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const data::SampleSet x = ring_draw(n, 1);
    const data::SampleSet s = ring_draw(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::median_heuristic_sigmas(x, s, 7));
    }
}
BENCHMARK(BM_MedianHeuristic)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
