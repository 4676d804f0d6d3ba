#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "criticbench/ad/mlp_graph.hpp"
#include "criticbench/data/sample_set.hpp"

namespace criticbench::models {

// Critic-trained criteria. MMD is estimated in closed form and has no critic,
// so it does not appear here.
enum class Criterion { kGC, kLS, kIW };

const char* criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& s);

struct CriticArch {
    std::vector<std::size_t> widths;  // [d, hidden..., 1]
    ad::Activation activation = ad::Activation::kLeakyRelu;
    ad::OutputHead head = ad::OutputHead::kSigmoid;
};

// Fully-connected critic D_phi with a flat parameter vector laid out layer by
// layer: W_0 row-major, b_0, W_1, b_1, ... Criterion compatibility is
// enforced at construction:
//   GC requires a sigmoid head (bounded positive outputs),
//   LS requires a linear head,
//   IW requires a linear head and a smooth activation (gradient penalty).
class CriticNetwork {
public:
    CriticNetwork(CriticArch arch, Criterion criterion);

    // Fresh network with uniform(-s, s) weights, s = sqrt(6/(fan_in+fan_out)),
    // and zero biases, drawn from the seeded stream.
    static CriticNetwork initialized(CriticArch arch, Criterion criterion,
                                     std::uint64_t seed);

    const CriticArch& arch() const noexcept { return arch_; }
    Criterion criterion() const noexcept { return criterion_; }

    std::size_t input_dim() const noexcept { return arch_.widths.front(); }
    std::size_t param_count() const noexcept { return params_.size(); }

    const std::vector<double>& parameters() const noexcept { return params_; }
    std::vector<double>& mutable_parameters() noexcept { return params_; }

    // Direct forward pass (no graph): one output per row. A sigmoid head
    // yields values strictly inside (0, 1).
    std::vector<double> forward(const ad::Tensor& batch) const;
    std::vector<double> forward(const data::SampleSet& batch) const;

    // Graph plumbing: declare this critic's parameters as graph inputs.
    ad::MlpParams add_params(ad::Graph& g, const std::string& prefix = "") const;

    // Closed-form parameter count for an architecture.
    static std::size_t param_count_for(const std::vector<std::size_t>& widths);

private:
    CriticArch arch_;
    Criterion criterion_;
    std::vector<double> params_;
};

// Builds a graph whose output node is the (batch, d) matrix of input
// gradients nabla_x D(x) at `point`, expressed as differentiable nodes.
// Rejects critics with non-smooth activations.
ad::NodeId input_gradient_graph(ad::Graph& g, const ad::MlpParams& params,
                                const ad::MlpApplication& application,
                                const CriticArch& arch);

// Appends the criterion's discriminator loss (minimized; the ascended
// objective is J = -loss) over raw score nodes of a real and a fake batch.
// `penalty` is consumed only by IW; pass any node id otherwise.
ad::NodeId append_critic_loss(ad::Graph& g, Criterion criterion, ad::NodeId raw_real,
                              ad::NodeId raw_fake, ad::NodeId penalty,
                              double penalty_weight, double ls_a, double ls_b);

// Appends mean((||grad_x D(x_hat)||_2 - 1)^2) over per-row interpolates
// x_hat = t*real + (1-t)*fake, where `t` is a (batch, 1) input of uniform
// draws. Rejects critics with non-smooth activations.
ad::NodeId append_gradient_penalty(ad::Graph& g, const ad::MlpParams& params,
                                   ad::NodeId real, ad::NodeId fake, ad::NodeId t,
                                   const CriticArch& arch);

// -- flat-parameter helpers shared by the training loops --------------------

// Copies the flat vector into named tensors matching `p`'s layout.
void bind_params(ad::Bindings& b, const ad::MlpParams& p, const std::vector<double>& flat);

// flat += scale * grads (layout of `p`); unknown names are ignored so one
// gradient map can update critic and generator parameters independently.
void apply_gradients(std::vector<double>& flat, const ad::MlpParams& p,
                     const std::unordered_map<std::string, ad::Tensor>& grads, double scale);

// SGD with optional momentum: v <- momentum*v + g; flat += scale*v.
// `velocity` must have the flat vector's size (zeros on the first call).
void sgd_step(std::vector<double>& flat, std::vector<double>& velocity,
              const ad::MlpParams& p,
              const std::unordered_map<std::string, ad::Tensor>& grads, double scale,
              double momentum);

// Uniform(-s, s) Glorot-style initialization into a fresh flat vector.
std::vector<double> init_mlp_params(const std::vector<std::size_t>& widths,
                                    std::uint64_t seed);

// Direct (graph-free) MLP forward over flat parameters: hidden layers use
// `act`, the final layer is affine. Returns the (n, widths.back()) outputs.
ad::Tensor mlp_forward(const ad::Tensor& x, const std::vector<std::size_t>& widths,
                       const std::vector<double>& flat, ad::Activation act);

} // namespace criticbench::models
