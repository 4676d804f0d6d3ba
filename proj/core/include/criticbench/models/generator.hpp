#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "criticbench/ad/mlp_graph.hpp"
#include "criticbench/data/distributions.hpp"
#include "criticbench/data/sample_set.hpp"

namespace criticbench::models {

enum class GeneratorKind { kAnalytic, kNeural };

struct GeneratorArch {
    std::size_t noise_dim = 0;            // |z|, prior N(0, I)
    std::vector<std::size_t> widths;      // [|z|, hidden..., d], linear output
    ad::Activation activation = ad::Activation::kLeakyRelu;
};

// A sample source under evaluation. Two kinds:
//   analytic : a ground-truth distribution pushed through a corruption, the
//              controllable stand-in for a trained generator;
//   neural   : an MLP transform of gaussian noise, G_theta(z) with
//              z ~ N(0, I), produced by the toy-GAN trainer.
class GeneratorModel {
public:
    static GeneratorModel analytic(data::DistributionSpec base,
                                   data::CorruptionSpec corruption);
    // Fresh neural generator with seeded uniform init.
    static GeneratorModel neural(GeneratorArch arch, std::uint64_t seed);
    // Neural generator with explicit parameters (flat layout W0,b0,W1,b1,...).
    static GeneratorModel neural_with_params(GeneratorArch arch, std::vector<double> params);

    GeneratorKind kind() const noexcept { return kind_; }
    std::size_t output_dim() const;
    std::string describe() const;

    // n samples, deterministic per (model, n, seed).
    data::SampleSet generate(std::size_t n, std::uint64_t seed,
                             data::Role role = data::Role::kTest) const;

    // -- analytic accessors --
    const data::DistributionSpec& base() const;
    const data::CorruptionSpec& corruption() const;

    // -- neural accessors --
    const GeneratorArch& arch() const;
    const std::vector<double>& parameters() const;
    std::vector<double>& mutable_parameters();
    ad::MlpParams add_params(ad::Graph& g, const std::string& prefix = "g.") const;

private:
    GeneratorModel() = default;

    GeneratorKind kind_ = GeneratorKind::kAnalytic;
    // analytic
    data::DistributionSpec base_;
    data::CorruptionSpec corruption_;
    // neural
    GeneratorArch arch_;
    std::vector<double> params_;
};

} // namespace criticbench::models
