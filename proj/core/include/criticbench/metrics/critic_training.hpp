#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "criticbench/data/sample_set.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/models/generator.hpp"

namespace criticbench::metrics {

// The four test-time divergence estimators. GC, LS and IW fit a fresh critic
// per evaluation; MMD is closed-form and trains nothing.
enum class MetricKind { kGC, kLS, kIW, kMMD };

const char* metric_kind_name(MetricKind k);
MetricKind metric_kind_from_name(const std::string& s);

// True for the kinds that train a critic (everything but MMD).
bool metric_uses_critic(MetricKind k);

// The training criterion of a critic-based kind; config_error for MMD.
models::Criterion criterion_for(MetricKind k);

// Full recipe for one divergence estimate: critic architecture and training
// hyper-parameters for GC/LS/IW, kernel bandwidths for MMD, and the seed list
// over which the estimate is repeated. The defaults (N = 3000, eta = 0.05,
// m = 128) are desk-scale calibration choices, not published values.
struct MetricSpec {
    MetricKind kind = MetricKind::kGC;
    models::CriticArch critic;           // GC/LS/IW only
    std::size_t iterations = 3000;       // critic ascent steps N
    double learning_rate = 0.05;         // eta
    std::size_t batch = 128;             // minibatch size m
    double penalty_weight = 10.0;        // lambda (IW only)
    double ls_a = 0.0;                   // LS fake target
    double ls_b = 1.0;                   // LS real target
    std::vector<double> sigmas;          // MMD only; nonempty iff kind == MMD
    bool mmd_unbiased = false;           // MMD only: U-statistic instead of V
    std::vector<std::uint64_t> seeds = {1};

    // Throws config_error with the offending field path. Kind-specific: the
    // bandwidth list must be nonempty exactly when kind == MMD, the critic
    // architecture must be compatible with the kind's criterion, and the
    // penalty weight must be nonnegative for IW.
    void validate() const;
};

// A critic fitted for evaluation plus its per-step training curve: the
// objective J being ascended (penalty included for IW). Non-convergence is
// visible in the curve, never an error.
struct TrainedCritic {
    models::CriticNetwork critic;
    std::vector<double> curve;
};

// Critic fit for one seed: fresh seeded initialization (never a warm start),
// then spec.iterations minibatch ascent steps of the kind's objective against
// real minibatches from x_train and fresh generator batches. x_train.role
// must be train. Throws train_abort when the loss leaves the finite range and
// config_error for kind == MMD or kind != spec.kind.
TrainedCritic train_critic(MetricKind kind, const data::SampleSet& x_train,
                           const models::GeneratorModel& gen, const MetricSpec& spec,
                           std::uint64_t seed);

// Frozen-critic evaluation: the kind's objective on held-out real samples
// versus n_fake fresh generator samples drawn from the evaluation stream of
// `seed`. x_test.role must be test or validation. The IW score is the
// unpenalized mean gap; the penalty shapes training only.
double evaluate_metric(MetricKind kind, const data::SampleSet& x_test,
                       const models::GeneratorModel& gen,
                       const models::CriticNetwork& critic, std::size_t n_fake,
                       std::uint64_t seed, double ls_a = 0.0, double ls_b = 1.0);

// Closed-form MMD evaluation against n_fake fresh generator samples: the
// maximum of mmd2 over the bandwidth list. Same role rule as above.
double evaluate_mmd(const data::SampleSet& x_test, const models::GeneratorModel& gen,
                    const std::vector<double>& sigmas, std::size_t n_fake,
                    std::uint64_t seed, bool unbiased = false);

} // namespace criticbench::metrics
