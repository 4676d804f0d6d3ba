#include "criticbench/models/critic.hpp"

#include <cmath>
#include <utility>

#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::models {

namespace {

void validate_arch(const CriticArch& arch, Criterion criterion) {
    if (arch.widths.size() < 2) {
        throw config_error("critic.widths: need input and output widths");
    }
    for (std::size_t w : arch.widths) {
        if (w == 0) throw config_error("critic.widths: widths must be positive");
    }
    if (arch.widths.back() != 1) {
        throw config_error("critic.widths: output width must be 1, got " +
                           std::to_string(arch.widths.back()));
    }
    switch (criterion) {
        case Criterion::kGC:
            if (arch.head != ad::OutputHead::kSigmoid) {
                throw config_error(
                    "critic.head: GC requires the sigmoid head (bounded positive outputs)");
            }
            break;
        case Criterion::kLS:
            if (arch.head != ad::OutputHead::kLinear) {
                throw config_error("critic.head: LS requires the linear head");
            }
            break;
        case Criterion::kIW:
            if (arch.head != ad::OutputHead::kLinear) {
                throw config_error("critic.head: IW requires the linear head");
            }
            if (!ad::activation_is_smooth(arch.activation)) {
                throw config_error(
                    "critic.activation: IW's gradient penalty needs a smooth activation "
                    "(tanh or softplus), not " +
                    std::string(ad::activation_name(arch.activation)));
            }
            break;
    }
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// keeps a sigmoid head honest about "strictly inside (0, 1)" at extreme
// pre-activations, where the closed form rounds to 0 or 1
double clamped_sigmoid(double x) {
    const double y = stable_sigmoid(x);
    if (y <= 0.0) return 1e-15;
    if (y >= 1.0) return 1.0 - 1e-15;
    return y;
}

} // namespace

const char* criterion_name(Criterion c) {
    switch (c) {
        case Criterion::kGC: return "gc";
        case Criterion::kLS: return "ls";
        case Criterion::kIW: return "iw";
    }
    return "?";
}

Criterion criterion_from_name(const std::string& s) {
    if (s == "gc") return Criterion::kGC;
    if (s == "ls") return Criterion::kLS;
    if (s == "iw") return Criterion::kIW;
    throw config_error("unknown criterion '" + s + "' (expected gc | ls | iw)");
}

CriticNetwork::CriticNetwork(CriticArch arch, Criterion criterion)
    : arch_(std::move(arch)), criterion_(criterion) {
    validate_arch(arch_, criterion_);
    params_.assign(param_count_for(arch_.widths), 0.0);
}

CriticNetwork CriticNetwork::initialized(CriticArch arch, Criterion criterion,
                                         std::uint64_t seed) {
    CriticNetwork net(std::move(arch), criterion);
    net.params_ = init_mlp_params(net.arch_.widths, seed);
    return net;
}

std::size_t CriticNetwork::param_count_for(const std::vector<std::size_t>& widths) {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        count += widths[l] * widths[l + 1] + widths[l + 1];
    }
    return count;
}

ad::Tensor mlp_forward(const ad::Tensor& x, const std::vector<std::size_t>& widths,
                       const std::vector<double>& flat, ad::Activation act) {
    if (x.rank() != 2 || x.cols() != widths.front()) {
        throw shape_error("mlp expects (batch, " + std::to_string(widths.front()) +
                          ") inputs, got " + x.shape_string());
    }
    if (flat.size() != CriticNetwork::param_count_for(widths)) {
        throw shape_error("flat parameter vector has " + std::to_string(flat.size()) +
                          " entries, architecture needs " +
                          std::to_string(CriticNetwork::param_count_for(widths)));
    }
    const std::size_t n = x.rows();
    std::vector<double> cur(x.data().begin(), x.data().end());
    std::vector<double> next;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t in = widths[l], out = widths[l + 1];
        const double* weight = flat.data() + offset;
        const double* bias = weight + in * out;
        next.assign(n * out, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t i = 0; i < in; ++i) {
                const double v = cur[r * in + i];
                const double* wrow = weight + i * out;
                double* nrow = next.data() + r * out;
                for (std::size_t j = 0; j < out; ++j) nrow[j] += v * wrow[j];
            }
            for (std::size_t j = 0; j < out; ++j) next[r * out + j] += bias[j];
        }
        offset += in * out + out;
        if (l + 2 < widths.size()) {
            switch (act) {
                case ad::Activation::kLeakyRelu:
                    for (double& v : next)
                        if (v < 0.0) v *= 0.2;
                    break;
                case ad::Activation::kTanh:
                    for (double& v : next) v = std::tanh(v);
                    break;
                case ad::Activation::kSoftplus:
                    for (double& v : next)
                        v = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
                    break;
            }
        }
        cur.swap(next);
    }
    return ad::Tensor({n, widths.back()}, std::move(cur));
}

std::vector<double> CriticNetwork::forward(const ad::Tensor& batch) const {
    ad::Tensor raw = mlp_forward(batch, arch_.widths, params_, arch_.activation);
    std::vector<double> out(raw.data().begin(), raw.data().end());
    if (arch_.head == ad::OutputHead::kSigmoid) {
        for (double& v : out) v = clamped_sigmoid(v);
    }
    return out;
}

std::vector<double> CriticNetwork::forward(const data::SampleSet& batch) const {
    return forward(batch.data());
}

ad::MlpParams CriticNetwork::add_params(ad::Graph& g, const std::string& prefix) const {
    return ad::add_mlp_params(g, arch_.widths, prefix);
}

ad::NodeId input_gradient_graph(ad::Graph& g, const ad::MlpParams& params,
                                const ad::MlpApplication& application,
                                const CriticArch& arch) {
    return ad::append_mlp_input_gradient(g, params, application, arch.activation);
}

ad::NodeId append_critic_loss(ad::Graph& g, Criterion criterion, ad::NodeId raw_real,
                              ad::NodeId raw_fake, ad::NodeId penalty,
                              double penalty_weight, double ls_a, double ls_b) {
    switch (criterion) {
        case Criterion::kGC:
            // -J = -mean(log D(x)) - mean(log(1 - D(y))), with the logs of the
            // sigmoid head folded into softplus for stability
            return g.add(g.mean(g.softplus(g.neg(raw_real))), g.mean(g.softplus(raw_fake)));
        case Criterion::kLS: {
            ad::NodeId real_term =
                g.mean(g.square(g.add(raw_real, g.constant(ad::Tensor::vector({-ls_b})))));
            ad::NodeId fake_term =
                g.mean(g.square(g.add(raw_fake, g.constant(ad::Tensor::vector({-ls_a})))));
            return g.add(real_term, fake_term);
        }
        case Criterion::kIW: {
            ad::NodeId wass = g.add(g.mean(raw_fake), g.neg(g.mean(raw_real)));
            return g.add(wass,
                         g.mul(g.constant(ad::Tensor::scalar(penalty_weight)), penalty));
        }
    }
    throw config_error("unreachable criterion");
}

ad::NodeId append_gradient_penalty(ad::Graph& g, const ad::MlpParams& params,
                                   ad::NodeId real, ad::NodeId fake, ad::NodeId t,
                                   const CriticArch& arch) {
    ad::NodeId mix = g.lerp(real, fake, t);
    ad::MlpApplication app =
        append_mlp_forward(g, params, mix, arch.activation, ad::OutputHead::kLinear);
    ad::NodeId ig = input_gradient_graph(g, params, app, arch);
    ad::NodeId norm = g.feature_l2norm(ig);
    return g.mean(g.square(g.add(norm, g.constant(ad::Tensor::vector({-1.0})))));
}

void bind_params(ad::Bindings& b, const ad::MlpParams& p, const std::vector<double>& flat) {
    std::size_t offset = 0;
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        ad::Tensor w = ad::Tensor::zeros({in, out});
        for (std::size_t i = 0; i < in * out; ++i) w[i] = flat[offset + i];
        offset += in * out;
        ad::Tensor bias = ad::Tensor::zeros({out});
        for (std::size_t i = 0; i < out; ++i) bias[i] = flat[offset + i];
        offset += out;
        b.insert_or_assign(p.weight_name(l), std::move(w));
        b.insert_or_assign(p.bias_name(l), std::move(bias));
    }
    if (offset != flat.size()) {
        throw shape_error("flat parameter vector has " + std::to_string(flat.size()) +
                          " entries, layout needs " + std::to_string(offset));
    }
}

void apply_gradients(std::vector<double>& flat, const ad::MlpParams& p,
                     const std::unordered_map<std::string, ad::Tensor>& grads, double scale) {
    std::size_t offset = 0;
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        for (const bool is_bias : {false, true}) {
            const std::string name = is_bias ? p.bias_name(l) : p.weight_name(l);
            const std::size_t count = is_bias ? out : in * out;
            auto it = grads.find(name);
            if (it != grads.end()) {
                const ad::Tensor& gt = it->second;
                for (std::size_t i = 0; i < count; ++i) flat[offset + i] += scale * gt[i];
            }
            offset += count;
        }
    }
}

void sgd_step(std::vector<double>& flat, std::vector<double>& velocity,
              const ad::MlpParams& p,
              const std::unordered_map<std::string, ad::Tensor>& grads, double scale,
              double momentum) {
    if (momentum == 0.0) {
        apply_gradients(flat, p, grads, scale);
        return;
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        for (const bool is_bias : {false, true}) {
            const std::string name = is_bias ? p.bias_name(l) : p.weight_name(l);
            const std::size_t count = is_bias ? out : in * out;
            auto it = grads.find(name);
            if (it != grads.end()) {
                const ad::Tensor& gt = it->second;
                for (std::size_t i = 0; i < count; ++i) {
                    velocity[offset + i] = momentum * velocity[offset + i] + gt[i];
                    flat[offset + i] += scale * velocity[offset + i];
                }
            }
            offset += count;
        }
    }
}

std::vector<double> init_mlp_params(const std::vector<std::size_t>& widths,
                                    std::uint64_t seed) {
    std::vector<double> flat(CriticNetwork::param_count_for(widths), 0.0);
    SplitMix64 rng(seed);
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t in = widths[l], out = widths[l + 1];
        const double s = std::sqrt(6.0 / static_cast<double>(in + out));
        for (std::size_t i = 0; i < in * out; ++i) {
            flat[offset + i] = rng.next_uniform(-s, s);
        }
        offset += in * out;
        offset += out; // biases start at zero
    }
    return flat;
}

} // namespace criticbench::models
