#include "criticbench/metrics/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "criticbench/errors.hpp"
#include "criticbench/parallel.hpp"

namespace criticbench::metrics {

const char* better_direction_name(BetterDirection d) {
    return d == BetterDirection::kLower ? "lower" : "higher";
}

BetterDirection better_direction_from_name(const std::string& s) {
    if (s == "lower") return BetterDirection::kLower;
    if (s == "higher") return BetterDirection::kHigher;
    throw config_error("unknown direction '" + s + "' (expected lower | higher)");
}

BetterDirection better_direction(MetricKind) { return BetterDirection::kLower; }

int compare_scores(double a, double b, BetterDirection dir) {
    if (std::abs(a - b) <= 1e-12) return 0;
    const bool a_better = dir == BetterDirection::kLower ? a < b : a > b;
    return a_better ? -1 : 1;
}

std::pair<double, double> score_moments(const std::vector<std::uint64_t>& seeds,
                                        const std::vector<double>& scores) {
    if (seeds.size() != scores.size()) {
        throw shape_error("score_moments: seed count " + std::to_string(seeds.size()) +
                          " does not match score count " + std::to_string(scores.size()));
    }
    std::vector<std::size_t> order(seeds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return seeds[a] < seeds[b]; });

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i : order) {
        if (std::isfinite(scores[i])) {
            sum += scores[i];
            ++count;
        }
    }
    if (count == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan};
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t i : order) {
        if (std::isfinite(scores[i])) {
            const double d = scores[i] - mean;
            sq += d * d;
        }
    }
    return {mean, std::sqrt(sq / static_cast<double>(count))};
}

MetricResult divergence_computation(const data::SampleSet& x_train,
                                    const data::SampleSet& x_test,
                                    const models::GeneratorModel& gen,
                                    const MetricSpec& spec, std::size_t n_fake,
                                    std::size_t workers) {
    spec.validate();
    if (x_train.role() != data::Role::kTrain) {
        throw config_error("divergence: x_train role must be train, got " +
                           std::string(data::role_name(x_train.role())));
    }
    if (x_train.dim() != x_test.dim()) {
        throw config_error("divergence: split dimensions differ, train has " +
                           std::to_string(x_train.dim()) + ", test has " +
                           std::to_string(x_test.dim()));
    }
    if (n_fake < 1) {
        throw config_error("divergence: n_fake must be >= 1");
    }

    const std::size_t k = spec.seeds.size();
    MetricResult result;
    result.kind = spec.kind;
    result.spec = spec;
    result.n_fake = n_fake;
    result.seeds = spec.seeds;
    result.scores.assign(k, std::numeric_limits<double>::quiet_NaN());
    result.curves.resize(k);
    result.direction = better_direction(spec.kind);

    std::vector<SeedFailure> failures(k);
    std::vector<char> failed(k, 0);

    parallel_for(k, workers == 0 ? default_worker_count() : workers, [&](std::size_t i) {
        const std::uint64_t seed = spec.seeds[i];
        try {
            if (spec.kind == MetricKind::kMMD) {
                result.scores[i] = evaluate_mmd(x_test, gen, spec.sigmas, n_fake, seed,
                                                spec.mmd_unbiased);
            } else {
                TrainedCritic fitted = train_critic(spec.kind, x_train, gen, spec, seed);
                result.curves[i] = std::move(fitted.curve);
                result.scores[i] = evaluate_metric(spec.kind, x_test, gen, fitted.critic,
                                                   n_fake, seed, spec.ls_a, spec.ls_b);
            }
        } catch (const train_abort& abort) {
            failed[i] = 1;
            failures[i] = SeedFailure{seed, abort.iteration(), abort.what()};
        }
    });

    for (std::size_t i = 0; i < k; ++i) {
        if (failed[i]) {
            result.partial = true;
            result.failures.push_back(failures[i]);
        }
    }
    const auto [mean, stddev] = score_moments(result.seeds, result.scores);
    result.mean = mean;
    result.stddev = stddev;
    return result;
}

} // namespace criticbench::metrics
