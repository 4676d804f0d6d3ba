#include "criticbench/models/generator.hpp"

#include <cmath>
#include <utility>

#include "criticbench/errors.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::models {

GeneratorModel GeneratorModel::analytic(data::DistributionSpec base,
                                        data::CorruptionSpec corruption) {
    base.validate();
    corruption.validate();
    GeneratorModel m;
    m.kind_ = GeneratorKind::kAnalytic;
    m.base_ = std::move(base);
    m.corruption_ = corruption;
    return m;
}

namespace {

void validate_gen_arch(const GeneratorArch& arch) {
    if (arch.noise_dim < 1) throw config_error("generator.noise_dim: |z| >= 1 required");
    if (arch.widths.size() < 2) {
        throw config_error("generator.widths: need input and output widths");
    }
    if (arch.widths.front() != arch.noise_dim) {
        throw config_error("generator.widths: first width must equal noise_dim " +
                           std::to_string(arch.noise_dim));
    }
    for (std::size_t w : arch.widths) {
        if (w == 0) throw config_error("generator.widths: widths must be positive");
    }
}

} // namespace

GeneratorModel GeneratorModel::neural(GeneratorArch arch, std::uint64_t seed) {
    validate_gen_arch(arch);
    GeneratorModel m;
    m.kind_ = GeneratorKind::kNeural;
    m.params_ = init_mlp_params(arch.widths, seed);
    m.arch_ = std::move(arch);
    return m;
}

GeneratorModel GeneratorModel::neural_with_params(GeneratorArch arch,
                                                  std::vector<double> params) {
    validate_gen_arch(arch);
    const std::size_t want = CriticNetwork::param_count_for(arch.widths);
    if (params.size() != want) {
        throw config_error("generator parameters: got " + std::to_string(params.size()) +
                           " values, architecture needs " + std::to_string(want));
    }
    GeneratorModel m;
    m.kind_ = GeneratorKind::kNeural;
    m.arch_ = std::move(arch);
    m.params_ = std::move(params);
    return m;
}

std::size_t GeneratorModel::output_dim() const {
    return kind_ == GeneratorKind::kAnalytic ? base_.dimension : arch_.widths.back();
}

std::string GeneratorModel::describe() const {
    if (kind_ == GeneratorKind::kAnalytic) {
        std::string s = std::string("analytic:") + data::distribution_kind_name(base_.kind);
        if (corruption_.level > 0.0) {
            s += std::string("~") + data::corruption_kind_name(corruption_.kind);
        }
        return s;
    }
    std::string s = "neural:[";
    for (std::size_t i = 0; i < arch_.widths.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(arch_.widths[i]);
    }
    return s + "]";
}

data::SampleSet GeneratorModel::generate(std::size_t n, std::uint64_t seed,
                                         data::Role role) const {
    if (n < 1) throw config_error("generate: n >= 1 required");
    if (kind_ == GeneratorKind::kAnalytic) {
        data::SampleSet clean = data::sample(base_, n, seed, role, describe());
        return data::corrupt(clean, corruption_, seed);
    }

    if (params_.empty()) throw config_error("generate: uninitialized generator parameters");
    const std::size_t zdim = arch_.noise_dim;
    SplitMix64 rng(derive_seed(seed, seed_salt::kNoisePrior));
    ad::Tensor z = ad::Tensor::zeros({n, zdim});
    for (std::size_t i = 0; i < z.numel(); ++i) z[i] = rng.next_gaussian();

    // linear output, no squashing: data vectors are unbounded, unlike images
    ad::Tensor x = mlp_forward(z, arch_.widths, params_, arch_.activation);
    return data::SampleSet(std::move(x), role, describe());
}

const data::DistributionSpec& GeneratorModel::base() const {
    if (kind_ != GeneratorKind::kAnalytic) {
        throw config_error("base(): generator is not analytic");
    }
    return base_;
}

const data::CorruptionSpec& GeneratorModel::corruption() const {
    if (kind_ != GeneratorKind::kAnalytic) {
        throw config_error("corruption(): generator is not analytic");
    }
    return corruption_;
}

const GeneratorArch& GeneratorModel::arch() const {
    if (kind_ != GeneratorKind::kNeural) throw config_error("arch(): generator is not neural");
    return arch_;
}

const std::vector<double>& GeneratorModel::parameters() const {
    if (kind_ != GeneratorKind::kNeural) {
        throw config_error("parameters(): generator is not neural");
    }
    return params_;
}

std::vector<double>& GeneratorModel::mutable_parameters() {
    if (kind_ != GeneratorKind::kNeural) {
        throw config_error("parameters(): generator is not neural");
    }
    return params_;
}

ad::MlpParams GeneratorModel::add_params(ad::Graph& g, const std::string& prefix) const {
    if (kind_ != GeneratorKind::kNeural) {
        throw config_error("add_params(): generator is not neural");
    }
    return ad::add_mlp_params(g, arch_.widths, prefix);
}

} // namespace criticbench::models
