#include "criticbench/ad/mlp_graph.hpp"

#include <cstddef>
#include <string>

#include "criticbench/errors.hpp"

namespace criticbench::ad {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::kLeakyRelu: return "leaky-relu";
        case Activation::kTanh: return "tanh";
        case Activation::kSoftplus: return "softplus";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "leaky-relu") return Activation::kLeakyRelu;
    if (name == "tanh") return Activation::kTanh;
    if (name == "softplus") return Activation::kSoftplus;
    throw config_error("unknown activation '" + name +
                       "' (expected leaky-relu | tanh | softplus)");
}

bool activation_is_smooth(Activation a) { return a != Activation::kLeakyRelu; }

const char* output_head_name(OutputHead h) {
    return h == OutputHead::kSigmoid ? "sigmoid" : "linear";
}

OutputHead output_head_from_name(const std::string& name) {
    if (name == "sigmoid") return OutputHead::kSigmoid;
    if (name == "linear") return OutputHead::kLinear;
    throw config_error("unknown output head '" + name + "' (expected sigmoid | linear)");
}

std::vector<std::string> MlpParams::names() const {
    std::vector<std::string> out;
    out.reserve(2 * weights.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.push_back(weight_name(l));
        out.push_back(bias_name(l));
    }
    return out;
}

MlpParams add_mlp_params(Graph& g, const std::vector<std::size_t>& layer_sizes,
                         const std::string& prefix) {
    if (layer_sizes.size() < 2) {
        throw config_error("mlp needs at least an input and an output width, got " +
                           std::to_string(layer_sizes.size()) + " entries");
    }
    for (std::size_t s : layer_sizes) {
        if (s == 0) throw config_error("mlp layer widths must be positive");
    }
    MlpParams p;
    p.layer_sizes = layer_sizes;
    p.prefix = prefix;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        p.weights.push_back(g.input(p.weight_name(l), {layer_sizes[l], layer_sizes[l + 1]}));
        p.biases.push_back(g.input(p.bias_name(l), {layer_sizes[l + 1]}));
    }
    return p;
}

MlpApplication append_mlp_forward(Graph& g, const MlpParams& params, NodeId in,
                                  Activation act, OutputHead head) {
    const auto& in_shape = g.shape_of(in);
    if (in_shape.size() != 2 || in_shape[1] != params.layer_sizes.front()) {
        throw shape_error("mlp input must be (batch, " +
                          std::to_string(params.layer_sizes.front()) + ")");
    }
    MlpApplication app;
    app.in = in;
    const std::size_t layers = params.layer_count();
    NodeId a = in;
    for (std::size_t l = 0; l < layers; ++l) {
        NodeId z = g.add(g.matmul(a, params.weights[l]), params.biases[l]);
        app.preacts.push_back(z);
        if (l + 1 == layers) {
            a = z;
        } else {
            switch (act) {
                case Activation::kLeakyRelu: a = g.leaky_relu(z); break;
                case Activation::kTanh: a = g.tanh(z); break;
                case Activation::kSoftplus: a = g.softplus(z); break;
            }
            app.hidden.push_back(a);
        }
    }
    app.raw = a;
    app.out = head == OutputHead::kSigmoid ? g.sigmoid(a) : a;
    return app;
}

NodeId append_mlp_input_gradient(Graph& g, const MlpParams& params,
                                 const MlpApplication& app, Activation act) {
    if (!activation_is_smooth(act)) {
        throw config_error("input gradients need a twice-differentiable activation; '" +
                           std::string(activation_name(act)) + "' is not smooth at 0");
    }
    if (params.layer_sizes.back() != 1) {
        throw shape_error("input gradient requires a scalar score (final width 1), got " +
                          std::to_string(params.layer_sizes.back()));
    }
    const std::size_t batch = g.shape_of(app.in)[0];
    const std::size_t layers = params.layer_count();

    // Per-row chain rule, back to front. Start with d(raw)/d(a_{L-1}) = W_L^T
    // replicated over the batch, then for each hidden layer multiply by the
    // activation derivative at z_l and push through W_l^T. Every step is an
    // ordinary graph op, so backward() later differentiates the whole chain
    // with respect to the weights (the double-backprop the penalty needs).
    NodeId ones_col = g.constant(Tensor::ones({batch, 1}));
    NodeId grad = g.matmul(ones_col, params.weights[layers - 1], false, true);

    for (std::size_t l = layers - 1; l-- > 0;) {
        NodeId dact;
        if (act == Activation::kTanh) {
            // tanh'(z) = 1 - a^2, from the stored post-activation
            NodeId ones_row = g.constant(Tensor::ones({params.layer_sizes[l + 1]}));
            dact = g.add(g.neg(g.square(app.hidden[l])), ones_row);
        } else {
            // softplus'(z) = sigmoid(z)
            dact = g.sigmoid(app.preacts[l]);
        }
        NodeId h = g.mul(grad, dact);
        grad = g.matmul(h, params.weights[l], false, true);
    }
    return grad; // (batch, d)
}

} // namespace criticbench::ad
