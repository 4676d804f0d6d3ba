#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "criticbench/metrics/critic_training.hpp"

namespace criticbench::metrics {

enum class BetterDirection { kLower, kHigher };

const char* better_direction_name(BetterDirection d);
BetterDirection better_direction_from_name(const std::string& s);

// Every kind estimates a divergence from the data distribution, so a smaller
// score means a better generator for all four. Kept as an explicit per-kind
// mapping so that ranking code never hard-codes the convention.
BetterDirection better_direction(MetricKind k);

// Orders two scores under a direction. Scores equal within 1e-12 (absolute)
// compare as a tie. Returns -1 when `a` is the better score, 0 on a tie, and
// +1 when `b` is better.
int compare_scores(double a, double b, BetterDirection dir);

// One seed that aborted during critic training.
struct SeedFailure {
    std::uint64_t seed = 0;
    std::size_t iteration = 0;
    std::string message;
};

// Aggregate of one divergence estimate over the spec's seed list.
struct MetricResult {
    MetricKind kind = MetricKind::kGC;
    MetricSpec spec;                          // snapshot of the recipe
    std::size_t n_fake = 0;                   // generator samples per evaluation
    std::vector<std::uint64_t> seeds;         // == spec.seeds
    std::vector<double> scores;               // per seed; NaN for failed seeds
    std::vector<std::vector<double>> curves;  // per-seed training curves; empty for MMD
    double mean = 0.0;                        // over the finite scores
    double stddev = 0.0;                      // population std over the finite scores
    BetterDirection direction = BetterDirection::kLower;
    bool partial = false;                     // true when >= 1 seed aborted
    std::vector<SeedFailure> failures;
};

// Mean and population standard deviation (divide by the count, so a single
// seed reports std 0) over the finite entries of `scores`. The reduction
// order is ascending seed value (ties by position), which makes the stored
// mean/std exactly recomputable from (seeds, scores) regardless of how the
// per-seed work was scheduled. Returns {NaN, NaN} when no score is finite.
std::pair<double, double> score_moments(const std::vector<std::uint64_t>& seeds,
                                        const std::vector<double>& scores);

// The full Algorithm-1 pipeline over spec.seeds: per seed, fit a fresh critic
// on x_train (skipped for MMD) and evaluate against n_fake fresh generator
// samples on x_test. Seeds fan out across `workers` threads (0 = one per
// hardware thread); each seed's pipeline is single-threaded and shares only
// immutable inputs, and the reduce is ordered by seed value, so the result is
// bitwise identical for any worker count. A train_abort on a seed marks the
// result partial (score NaN, failure recorded) instead of propagating.
MetricResult divergence_computation(const data::SampleSet& x_train,
                                    const data::SampleSet& x_test,
                                    const models::GeneratorModel& gen,
                                    const MetricSpec& spec, std::size_t n_fake,
                                    std::size_t workers = 0);

} // namespace criticbench::metrics
