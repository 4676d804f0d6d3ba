// Critic-fitting throughput: ascent steps per second for each objective.

#include <benchmark/benchmark.h>

#include "criticbench/data/distributions.hpp"
#include "criticbench/metrics/critic_training.hpp"
#include "criticbench/models/generator.hpp"

using namespace criticbench;

namespace {

constexpr std::size_t kIterations = 100;

metrics::MetricSpec spec_for(metrics::MetricKind kind) {
    metrics::MetricSpec spec;
    spec.kind = kind;
    spec.iterations = kIterations;
    spec.batch = 64;
    spec.critic.widths = {2, 16, 1};
    switch (kind) {
    case metrics::MetricKind::kGC:
        spec.critic.activation = ad::Activation::kLeakyRelu;
        spec.critic.head = ad::OutputHead::kSigmoid;
        break;
    case metrics::MetricKind::kLS:
        spec.critic.activation = ad::Activation::kLeakyRelu;
        spec.critic.head = ad::OutputHead::kLinear;
        break;
    default:  // IW: the gradient penalty needs a smooth activation
        spec.critic.activation = ad::Activation::kTanh;
        spec.critic.head = ad::OutputHead::kLinear;
        spec.learning_rate = 0.02;
        break;
    }
    return spec;
}

void run_training(benchmark::State& state, metrics::MetricKind kind) {
    const auto dist = data::DistributionSpec::gaussian_ring(8, 2.0, 0.2);
    const data::SampleSet x_train = data::sample(dist, 2000, 17);
    const models::GeneratorModel gen = models::GeneratorModel::analytic(
        dist, data::CorruptionSpec{data::CorruptionKind::kIntensityShift, 1.0});
    const metrics::MetricSpec spec = spec_for(kind);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::train_critic(kind, x_train, gen, spec, 1));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(kIterations));
}

void BM_TrainCriticGc(benchmark::State& state) {
    run_training(state, metrics::MetricKind::kGC);
}
void BM_TrainCriticLs(benchmark::State& state) {
    run_training(state, metrics::MetricKind::kLS);
}
void BM_TrainCriticIw(benchmark::State& state) {
    run_training(state, metrics::MetricKind::kIW);
}

BENCHMARK(BM_TrainCriticGc)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainCriticLs)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainCriticIw)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
