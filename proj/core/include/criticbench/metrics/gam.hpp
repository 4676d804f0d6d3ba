#pragma once

#include <cstddef>
#include <cstdint>

#include "criticbench/data/sample_set.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/models/generator.hpp"

namespace criticbench::metrics {

// Outcome of the generative adversarial metric between two trained
// (critic, generator) pairs.
struct GamResult {
    // fool_rate_d1_on_g2 / fool_rate_d2_on_g1, i.e. the printed D1(x2)/D2(x1)
    // reading. Under it a ratio > 1 means pair 2's generator fools pair 1's
    // critic more than the reverse; the inverse reading (swap the pairs or
    // take the reciprocal) is equally defensible, so consumers should rank by
    // a documented convention rather than assume a direction.
    double ratio = 0.0;
    double fool_rate_d1_on_g2 = 0.0;  // fraction of G2 samples with D1 > 0.5
    double fool_rate_d2_on_g1 = 0.0;  // fraction of G1 samples with D2 > 0.5
    bool infinite = false;            // zero denominator with nonzero numerator
    bool uncalibrated = false;        // real-data accuracies differ by > 0.1
    double d1_real_accuracy = 0.0;
    double d2_real_accuracy = 0.0;
};

// Cross-fooling ratio between two GAN pairs. Both critics must have sigmoid
// heads; "fools" means the critic scores a generated sample above 0.5. Each
// generator draws n samples from the same derived seed so identical pairs
// compare their own samples and yield ratio 1 exactly. The calibration set
// must be held-out real data (test or validation role); if the two critics'
// accuracies on it differ by more than 0.1 the result is flagged
// uncalibrated. A zero denominator with a nonzero numerator yields +infinity
// with the infinite flag set; equal numerator and denominator (including
// 0/0) yield exactly 1.
GamResult gam_ratio(const models::CriticNetwork& critic1,
                    const models::GeneratorModel& generator1,
                    const models::CriticNetwork& critic2,
                    const models::GeneratorModel& generator2,
                    const data::SampleSet& real_calibration, std::size_t n,
                    std::uint64_t seed);

} // namespace criticbench::metrics
