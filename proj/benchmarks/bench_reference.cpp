// Reference-metric hot paths: moment matching, spectral FID, and C2ST.

#include <benchmark/benchmark.h>

#include "criticbench/data/distributions.hpp"
#include "criticbench/metrics/c2st.hpp"
#include "criticbench/metrics/gaussian_fid.hpp"
#include "criticbench/metrics/inception_score.hpp"

using namespace criticbench;

namespace {

const data::DistributionSpec kRing = data::DistributionSpec::gaussian_ring(8, 2.0, 0.2);

void BM_GaussianStats(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const data::SampleSet x = data::sample(kRing, n, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::gaussian_stats(x));
    }
}
BENCHMARK(BM_GaussianStats)->Arg(2000)->Arg(10000);

void BM_Fid(benchmark::State& state) {
    const metrics::GaussianStats p = metrics::gaussian_stats(data::sample(kRing, 2000, 1));
    const metrics::GaussianStats q = metrics::gaussian_stats(data::sample(kRing, 2000, 2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::fid(p, q));
    }
}
BENCHMARK(BM_Fid);

void BM_MixtureResponsibilities(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const data::SampleSet x = data::sample(kRing, n, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::mixture_class_probabilities(kRing, x.data()));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MixtureResponsibilities)->Arg(1000);

void BM_C2stKnn(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const data::SampleSet real = data::sample(kRing, n, 1, data::Role::kTest);
    const data::SampleSet fake = data::sample(kRing, n, 2, data::Role::kTest);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::c2st(real, fake, metrics::C2stOptions{}, 1));
    }
}
BENCHMARK(BM_C2stKnn)->Arg(500)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
