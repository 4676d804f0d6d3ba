#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "criticbench/ad/graph.hpp"

namespace criticbench::ad {

enum class Activation { kLeakyRelu, kTanh, kSoftplus };
enum class OutputHead { kLinear, kSigmoid };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);
// Twice-differentiable activations, the only ones valid under a gradient
// penalty (leaky-relu has no second derivative at 0).
bool activation_is_smooth(Activation a);

const char* output_head_name(OutputHead h);
OutputHead output_head_from_name(const std::string& name);

// Parameter input nodes of a fully-connected net, created once per graph and
// shared by every forward application (so D(x) and D(G(z)) in one loss graph
// read the same weights). Binding keys are "<prefix>W<l>" / "<prefix>b<l>".
struct MlpParams {
    std::vector<NodeId> weights;        // W_l with shape (sizes[l], sizes[l+1])
    std::vector<NodeId> biases;         // b_l with shape (sizes[l+1],)
    std::vector<std::size_t> layer_sizes;
    std::string prefix;

    std::size_t layer_count() const noexcept { return weights.size(); }
    std::string weight_name(std::size_t l) const { return prefix + "W" + std::to_string(l); }
    std::string bias_name(std::size_t l) const { return prefix + "b" + std::to_string(l); }
    // All binding keys, layer by layer: W0, b0, W1, b1, ...
    std::vector<std::string> names() const;
};

MlpParams add_mlp_params(Graph& g, const std::vector<std::size_t>& layer_sizes,
                         const std::string& prefix = "");

// One application of the net to a (batch, d) input node.
struct MlpApplication {
    NodeId in;
    NodeId raw;                   // (batch, out) pre-head affine output
    NodeId out;                   // raw, or sigmoid(raw) for a sigmoid head
    std::vector<NodeId> preacts;  // z_l = a_{l-1} W_l + b_l, one per layer
    std::vector<NodeId> hidden;   // a_l = act(z_l), hidden layers only
};

// Appends y = W_L act(... act(x W_1 + b_1) ...) + b_L to the graph. Hidden
// layers use `act`; the final layer is affine, optionally followed by `head`.
MlpApplication append_mlp_forward(Graph& g, const MlpParams& params, NodeId in,
                                  Activation act, OutputHead head = OutputHead::kLinear);

// Appends nodes computing the (batch, d) matrix of per-row input gradients
// ∇_x of the raw (pre-head) score, built from ordinary forward ops so that a
// later backward() differentiates the result with respect to the parameters.
// Requires a scalar score (final width 1) and a smooth activation.
NodeId append_mlp_input_gradient(Graph& g, const MlpParams& params,
                                 const MlpApplication& app, Activation act);

} // namespace criticbench::ad
