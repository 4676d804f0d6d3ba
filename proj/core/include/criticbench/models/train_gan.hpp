#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "criticbench/data/sample_set.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/models/generator.hpp"

namespace criticbench::models {

struct TrainConfig {
    Criterion criterion = Criterion::kGC;
    double lr_d = 0.05;          // discriminator learning rate
    double lr_g = 0.05;          // generator learning rate
    std::size_t d_steps = 1;     // discriminator updates per cycle
    std::size_t g_steps = 1;     // generator updates per cycle
    std::size_t batch = 64;      // minibatch size m
    std::size_t cycles = 1000;   // N alternating cycles
    std::uint64_t seed = 0;
    double penalty_weight = 10.0; // lambda, IW only
    double ls_a = 0.0;            // LS fake target
    double ls_b = 1.0;            // LS real target
    double momentum = 0.0;        // optional SGD momentum (0 disables)

    void validate() const;
};

// Per-cycle training curves: the discriminator objective J (the quantity its
// ascent steps maximize) and the generator loss, each recorded after the last
// update of the cycle.
struct TrainTelemetry {
    std::vector<double> d_objective;
    std::vector<double> g_loss;
};

struct TrainedGan {
    GeneratorModel generator;
    CriticNetwork discriminator;
    TrainTelemetry telemetry;
};

// Alternating minibatch SGD: per cycle, d_steps discriminator ascent steps on
// the criterion's J, then g_steps generator descent steps on the matching
// generator loss (GC: original minimax; LS: (D(G(z)) - b)^2 target; IW:
// -E[D(G(z))]). Bit-deterministic per seed. A non-finite loss aborts with a
// train_abort carrying the iteration and last finite loss.
TrainedGan train_toy_gan(const data::SampleSet& data, const TrainConfig& cfg,
                         const CriticArch& critic_arch, const GeneratorArch& gen_arch);

} // namespace criticbench::models
