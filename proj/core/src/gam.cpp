#include "criticbench/metrics/gam.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::metrics {

namespace {

void require_sigmoid_head(const models::CriticNetwork& critic, const char* which) {
    if (critic.arch().head != ad::OutputHead::kSigmoid) {
        throw config_error(std::string("gam_ratio: ") + which +
                           " must have a sigmoid head");
    }
}

double fraction_above_half(const std::vector<double>& outputs) {
    std::size_t count = 0;
    for (double v : outputs) count += static_cast<std::size_t>(v > 0.5);
    return static_cast<double>(count) / static_cast<double>(outputs.size());
}

} // namespace

GamResult gam_ratio(const models::CriticNetwork& critic1,
                    const models::GeneratorModel& generator1,
                    const models::CriticNetwork& critic2,
                    const models::GeneratorModel& generator2,
                    const data::SampleSet& real_calibration, std::size_t n,
                    std::uint64_t seed) {
    require_sigmoid_head(critic1, "critic1");
    require_sigmoid_head(critic2, "critic2");
    if (n == 0) {
        throw config_error("gam_ratio: n must be >= 1");
    }
    if (real_calibration.role() == data::Role::kTrain) {
        throw config_error(
            "gam_ratio: calibration data must be held out (test or validation role)");
    }
    const std::size_t d = real_calibration.dim();
    if (generator1.output_dim() != d || generator2.output_dim() != d ||
        critic1.input_dim() != d || critic2.input_dim() != d) {
        throw shape_error("gam_ratio: critics, generators and calibration data must "
                          "share one dimension (calibration d=" +
                          std::to_string(d) + ")");
    }

    // One shared draw seed: identical pairs then compare identical samples,
    // making the self-comparison ratio exactly 1.
    const std::uint64_t draw_seed = derive_seed(seed, seed_salt::kFakeDraw);
    const data::SampleSet x1 = generator1.generate(n, draw_seed);
    const data::SampleSet x2 = generator2.generate(n, draw_seed);

    GamResult result;
    result.fool_rate_d1_on_g2 = fraction_above_half(critic1.forward(x2));
    result.fool_rate_d2_on_g1 = fraction_above_half(critic2.forward(x1));

    if (result.fool_rate_d1_on_g2 == result.fool_rate_d2_on_g1) {
        result.ratio = 1.0;
    } else if (result.fool_rate_d2_on_g1 == 0.0) {
        result.ratio = std::numeric_limits<double>::infinity();
        result.infinite = true;
    } else {
        result.ratio = result.fool_rate_d1_on_g2 / result.fool_rate_d2_on_g1;
    }

    result.d1_real_accuracy = fraction_above_half(critic1.forward(real_calibration));
    result.d2_real_accuracy = fraction_above_half(critic2.forward(real_calibration));
    result.uncalibrated =
        std::abs(result.d1_real_accuracy - result.d2_real_accuracy) > 0.1;
    return result;
}

} // namespace criticbench::metrics
