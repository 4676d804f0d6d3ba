#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "criticbench/ad/tensor.hpp"

namespace criticbench::ad {

using NodeId = std::size_t;
using Bindings = std::unordered_map<std::string, Tensor>;

enum class Op {
    kInput,
    kConstant,
    kMatmul,
    kAdd,
    kMul,
    kNeg,
    kLeakyRelu,
    kTanh,
    kSoftplus,
    kSigmoid,
    kLog,
    kSquare,
    kSqrt,
    kSum,
    kMean,
    kFeatureL2Norm,
    kLerp,
};

// Reverse-mode autodiff over a static, append-only operation graph.
//
// Nodes are appended through the builder methods below; argument ids must
// already exist, so insertion order is a topological order. Shapes are
// inferred and validated at build time. forward() evaluates the ancestors of
// a chosen output node; backward() then accumulates d(output)/d(node) for a
// scalar output. Input (and named constant) gradients are read back by name.
//
// A graph instance is single-threaded; distinct instances may run on
// distinct threads concurrently.
class Graph {
public:
    // -- construction -------------------------------------------------------
    NodeId input(std::string name, std::vector<std::size_t> shape);
    NodeId constant(Tensor value, std::string name = "");

    NodeId matmul(NodeId a, NodeId b, bool trans_a = false, bool trans_b = false);
    // Elementwise add; also accepts (batch, features) + (features) with the
    // rank-1 operand broadcast across the batch axis (either argument order).
    NodeId add(NodeId a, NodeId b);
    // Elementwise multiply of same-shape tensors, or scalar * tensor.
    NodeId mul(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId leaky_relu(NodeId a, double slope = 0.2);
    NodeId tanh(NodeId a);
    NodeId softplus(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId log(NodeId a);
    NodeId square(NodeId a);
    NodeId sqrt(NodeId a);
    NodeId sum(NodeId a);  // reduce all elements -> scalar
    NodeId mean(NodeId a); // reduce all elements -> scalar
    // Row-wise Euclidean norm of a (batch, features) matrix -> (batch, 1).
    NodeId feature_l2norm(NodeId a);
    // Affine interpolation a*u + (1-a)*v. u and v share a shape; the
    // coefficient is a scalar or, for rank-2 u, a (batch, 1) matrix of per-row
    // coefficients broadcast across features.
    NodeId lerp(NodeId u, NodeId v, NodeId coeff);

    // -- inspection ---------------------------------------------------------
    std::size_t node_count() const noexcept { return nodes_.size(); }
    const std::vector<std::size_t>& shape_of(NodeId id) const;
    Op op_of(NodeId id) const;

    // -- execution ----------------------------------------------------------
    // Binds the named inputs, evaluates every ancestor of `out`, and returns
    // its value. Deterministic given identical graph and bindings.
    const Tensor& forward(const Bindings& bindings, NodeId out);

    // Reverse pass from scalar node `out` (forward(..., out) must have run).
    // Returns d(out)/d(input) for every input node of the graph; inputs that
    // do not feed `out` get zero tensors of their declared shape.
    std::unordered_map<std::string, Tensor> backward(NodeId out);

    // Value / gradient of a node after forward / backward.
    const Tensor& value(NodeId id) const;
    const Tensor& grad(NodeId id) const;

private:
    struct Node {
        Op op;
        std::vector<NodeId> args;
        std::vector<std::size_t> shape;
        std::string name;      // inputs and named constants
        Tensor value;
        Tensor grad;
        bool trans_a = false;  // matmul
        bool trans_b = false;  // matmul
        double slope = 0.2;    // leaky_relu
        bool has_value = false;
        bool has_grad = false;
    };

    NodeId push(Node node);
    const Node& node(NodeId id) const;
    void check_id(NodeId id) const;
    std::string describe(NodeId id) const; // "node 7 (matmul)" for error text

    // Marks the ancestors of `out` (inclusive) in `reachable_`.
    void mark_ancestors(NodeId out);
    void eval_node(NodeId id);
    void backprop_node(NodeId id);

    std::vector<Node> nodes_;
    std::vector<char> reachable_;
    std::unordered_map<std::string, NodeId> input_ids_;
    bool forward_ran_ = false;
    NodeId forward_out_ = 0;
};

// Central finite-difference check of backward() against forward() for every
// coordinate of every bound input, at the given output node. Returns the
// maximum relative error, with denominator max(|analytic|, |numeric|, 1e-8).
// eps must lie in (0, 1e-2].
double gradient_check(Graph& g, NodeId out, const Bindings& bindings, double eps);

} // namespace criticbench::ad
