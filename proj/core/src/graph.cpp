#include "criticbench/ad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "criticbench/errors.hpp"

namespace criticbench::ad {

namespace {

const char* op_name(Op op) {
    switch (op) {
        case Op::kInput: return "input";
        case Op::kConstant: return "constant";
        case Op::kMatmul: return "matmul";
        case Op::kAdd: return "add";
        case Op::kMul: return "mul";
        case Op::kNeg: return "neg";
        case Op::kLeakyRelu: return "leaky_relu";
        case Op::kTanh: return "tanh";
        case Op::kSoftplus: return "softplus";
        case Op::kSigmoid: return "sigmoid";
        case Op::kLog: return "log";
        case Op::kSquare: return "square";
        case Op::kSqrt: return "sqrt";
        case Op::kSum: return "sum";
        case Op::kMean: return "mean";
        case Op::kFeatureL2Norm: return "feature_l2norm";
        case Op::kLerp: return "lerp";
    }
    return "?";
}

double stable_softplus(double x) {
    // log(1 + e^x) without overflow: max(x, 0) + log1p(e^{-|x|}).
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// True when `vec` is rank 1 and `mat` is rank 2 with matching feature width,
// i.e. the one permitted broadcast: (batch, features) + (features).
bool broadcastable(const std::vector<std::size_t>& mat, const std::vector<std::size_t>& vec) {
    return mat.size() == 2 && vec.size() == 1 && mat[1] == vec[0];
}

} // namespace

// ---------------------------------------------------------------------------
// construction

NodeId Graph::push(Node node) {
    nodes_.push_back(std::move(node));
    forward_ran_ = false; // values are stale once the graph grows
    return nodes_.size() - 1;
}

const Graph::Node& Graph::node(NodeId id) const {
    check_id(id);
    return nodes_[id];
}

void Graph::check_id(NodeId id) const {
    if (id >= nodes_.size()) {
        throw shape_error("graph node id " + std::to_string(id) + " out of range (" +
                          std::to_string(nodes_.size()) + " nodes)");
    }
}

std::string Graph::describe(NodeId id) const {
    const Node& n = nodes_[id];
    std::string s = "node " + std::to_string(id) + " (" + op_name(n.op);
    if (!n.name.empty()) s += " '" + n.name + "'";
    return s + ")";
}

NodeId Graph::input(std::string name, std::vector<std::size_t> shape) {
    if (name.empty()) throw config_error("input node requires a non-empty name");
    if (input_ids_.count(name)) {
        throw config_error("duplicate input name '" + name + "'");
    }
    Node n;
    n.op = Op::kInput;
    n.name = name;
    n.shape = std::move(shape);
    NodeId id = push(std::move(n));
    input_ids_.emplace(nodes_[id].name, id);
    return id;
}

NodeId Graph::constant(Tensor value, std::string name) {
    Node n;
    n.op = Op::kConstant;
    n.name = std::move(name);
    n.shape = value.shape();
    n.value = std::move(value);
    n.has_value = true;
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b, bool trans_a, bool trans_b) {
    check_id(a);
    check_id(b);
    const auto& sa = nodes_[a].shape;
    const auto& sb = nodes_[b].shape;
    if (sa.size() != 2 || sb.size() != 2) {
        throw shape_error("matmul arguments must be rank 2: " + describe(a) + " is rank " +
                          std::to_string(sa.size()) + ", " + describe(b) + " is rank " +
                          std::to_string(sb.size()));
    }
    const std::size_t m = trans_a ? sa[1] : sa[0];
    const std::size_t k = trans_a ? sa[0] : sa[1];
    const std::size_t kb = trans_b ? sb[1] : sb[0];
    const std::size_t nn = trans_b ? sb[0] : sb[1];
    if (k != kb) {
        throw shape_error("matmul inner dimensions disagree between " + describe(a) + " and " +
                          describe(b));
    }
    Node n;
    n.op = Op::kMatmul;
    n.args = {a, b};
    n.trans_a = trans_a;
    n.trans_b = trans_b;
    n.shape = {m, nn};
    return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    const auto& sa = nodes_[a].shape;
    const auto& sb = nodes_[b].shape;
    std::vector<std::size_t> out;
    if (sa == sb) {
        out = sa;
    } else if (broadcastable(sa, sb)) {
        out = sa;
    } else if (broadcastable(sb, sa)) {
        out = sb;
    } else {
        throw shape_error("add shapes incompatible between " + describe(a) + " and " +
                          describe(b) + "; only equal shapes or (batch, f) + (f) are allowed");
    }
    Node n;
    n.op = Op::kAdd;
    n.args = {a, b};
    n.shape = std::move(out);
    return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    const auto& sa = nodes_[a].shape;
    const auto& sb = nodes_[b].shape;
    std::vector<std::size_t> out;
    if (sa == sb) {
        out = sa;
    } else if (sa.empty()) {
        out = sb; // scalar * tensor
    } else if (sb.empty()) {
        out = sa; // tensor * scalar
    } else {
        throw shape_error("mul shapes incompatible between " + describe(a) + " and " +
                          describe(b) + "; only equal shapes or scalar * tensor are allowed");
    }
    Node n;
    n.op = Op::kMul;
    n.args = {a, b};
    n.shape = std::move(out);
    return push(std::move(n));
}

#define CB_UNARY_OP(method, kind)                  \
    NodeId Graph::method(NodeId a) {               \
        check_id(a);                               \
        Node n;                                    \
        n.op = kind;                               \
        n.args = {a};                              \
        n.shape = nodes_[a].shape;                 \
        return push(std::move(n));                 \
    }

CB_UNARY_OP(neg, Op::kNeg)
CB_UNARY_OP(tanh, Op::kTanh)
CB_UNARY_OP(softplus, Op::kSoftplus)
CB_UNARY_OP(sigmoid, Op::kSigmoid)
CB_UNARY_OP(log, Op::kLog)
CB_UNARY_OP(square, Op::kSquare)
CB_UNARY_OP(sqrt, Op::kSqrt)
#undef CB_UNARY_OP

NodeId Graph::leaky_relu(NodeId a, double slope) {
    check_id(a);
    Node n;
    n.op = Op::kLeakyRelu;
    n.args = {a};
    n.shape = nodes_[a].shape;
    n.slope = slope;
    return push(std::move(n));
}

NodeId Graph::sum(NodeId a) {
    check_id(a);
    Node n;
    n.op = Op::kSum;
    n.args = {a};
    n.shape = {};
    return push(std::move(n));
}

NodeId Graph::mean(NodeId a) {
    check_id(a);
    Node n;
    n.op = Op::kMean;
    n.args = {a};
    n.shape = {};
    return push(std::move(n));
}

NodeId Graph::feature_l2norm(NodeId a) {
    check_id(a);
    const auto& sa = nodes_[a].shape;
    if (sa.size() != 2) {
        throw shape_error("feature_l2norm requires a rank-2 argument, " + describe(a) +
                          " has rank " + std::to_string(sa.size()));
    }
    Node n;
    n.op = Op::kFeatureL2Norm;
    n.args = {a};
    n.shape = {sa[0], 1};
    return push(std::move(n));
}

NodeId Graph::lerp(NodeId u, NodeId v, NodeId coeff) {
    check_id(u);
    check_id(v);
    check_id(coeff);
    const auto& su = nodes_[u].shape;
    const auto& sv = nodes_[v].shape;
    const auto& sc = nodes_[coeff].shape;
    if (su != sv) {
        throw shape_error("lerp endpoints must share a shape: " + describe(u) + " vs " +
                          describe(v));
    }
    const bool scalar_coeff = sc.empty();
    const bool row_coeff = su.size() == 2 && sc.size() == 2 && sc[0] == su[0] && sc[1] == 1;
    if (!scalar_coeff && !row_coeff) {
        throw shape_error("lerp coefficient must be a scalar or (batch, 1): " + describe(coeff));
    }
    Node n;
    n.op = Op::kLerp;
    n.args = {u, v, coeff};
    n.shape = su;
    return push(std::move(n));
}

const std::vector<std::size_t>& Graph::shape_of(NodeId id) const { return node(id).shape; }

Op Graph::op_of(NodeId id) const { return node(id).op; }

// ---------------------------------------------------------------------------
// forward

void Graph::mark_ancestors(NodeId out) {
    reachable_.assign(nodes_.size(), 0);
    // args always precede their consumer, so one reverse sweep settles it.
    reachable_[out] = 1;
    for (std::size_t i = out + 1; i-- > 0;) {
        if (!reachable_[i]) continue;
        for (NodeId a : nodes_[i].args) reachable_[a] = 1;
    }
}

const Tensor& Graph::forward(const Bindings& bindings, NodeId out) {
    check_id(out);
    mark_ancestors(out);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        n.has_grad = false;
        if (!reachable_[i]) {
            if (n.op != Op::kConstant) n.has_value = false;
            continue;
        }
        if (n.op == Op::kInput) {
            auto it = bindings.find(n.name);
            if (it == bindings.end()) {
                throw config_error("unbound input '" + n.name + "'");
            }
            if (it->second.shape() != n.shape) {
                throw shape_error("binding for input '" + n.name + "' has shape " +
                                  it->second.shape_string() + ", declared " +
                                  Tensor::zeros(n.shape).shape_string());
            }
            n.value = it->second;
            n.has_value = true;
        } else if (n.op != Op::kConstant) {
            eval_node(i);
        }
    }
    forward_ran_ = true;
    forward_out_ = out;
    return nodes_[out].value;
}

void Graph::eval_node(NodeId id) {
    Node& n = nodes_[id];
    auto arg = [&](std::size_t k) -> const Tensor& { return nodes_[n.args[k]].value; };

    switch (n.op) {
        case Op::kInput:
        case Op::kConstant:
            return;

        case Op::kMatmul:
            n.value = ad::matmul(arg(0), arg(1), n.trans_a, n.trans_b);
            break;

        case Op::kAdd: {
            const Tensor& a = arg(0);
            const Tensor& b = arg(1);
            if (a.same_shape(b)) {
                Tensor out = a;
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
                n.value = std::move(out);
            } else {
                const Tensor& mat = a.rank() == 2 ? a : b;
                const Tensor& vec = a.rank() == 2 ? b : a;
                Tensor out = mat;
                const std::size_t f = vec.numel();
                for (std::size_t r = 0; r < mat.rows(); ++r)
                    for (std::size_t c = 0; c < f; ++c) out[r * f + c] += vec[c];
                n.value = std::move(out);
            }
            break;
        }

        case Op::kMul: {
            const Tensor& a = arg(0);
            const Tensor& b = arg(1);
            if (a.same_shape(b)) {
                Tensor out = a;
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
                n.value = std::move(out);
            } else {
                const Tensor& scal = a.rank() == 0 ? a : b;
                const Tensor& full = a.rank() == 0 ? b : a;
                Tensor out = full;
                const double s = scal.item();
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= s;
                n.value = std::move(out);
            }
            break;
        }

        case Op::kNeg: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) out[i] = -out[i];
            n.value = std::move(out);
            break;
        }

        case Op::kLeakyRelu: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i)
                if (out[i] < 0.0) out[i] *= n.slope;
            n.value = std::move(out);
            break;
        }

        case Op::kTanh: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
            n.value = std::move(out);
            break;
        }

        case Op::kSoftplus: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) out[i] = stable_softplus(out[i]);
            n.value = std::move(out);
            break;
        }

        case Op::kSigmoid: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) out[i] = stable_sigmoid(out[i]);
            n.value = std::move(out);
            break;
        }

        case Op::kLog: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) {
                if (out[i] <= 0.0) {
                    throw criticbench::domain_error("log of non-positive value " +
                                                    std::to_string(out[i]) + " at " +
                                                    describe(id));
                }
                out[i] = std::log(out[i]);
            }
            n.value = std::move(out);
            break;
        }

        case Op::kSquare: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= out[i];
            n.value = std::move(out);
            break;
        }

        case Op::kSqrt: {
            Tensor out = arg(0);
            for (std::size_t i = 0; i < out.numel(); ++i) {
                if (out[i] < 0.0) {
                    throw criticbench::domain_error("sqrt of negative value " +
                                                    std::to_string(out[i]) + " at " +
                                                    describe(id));
                }
                out[i] = std::sqrt(out[i]);
            }
            n.value = std::move(out);
            break;
        }

        case Op::kSum: {
            double s = 0.0;
            for (double v : arg(0).data()) s += v;
            n.value = Tensor::scalar(s);
            break;
        }

        case Op::kMean: {
            double s = 0.0;
            for (double v : arg(0).data()) s += v;
            n.value = Tensor::scalar(s / static_cast<double>(arg(0).numel()));
            break;
        }

        case Op::kFeatureL2Norm: {
            const Tensor& x = arg(0);
            const std::size_t rows = x.rows(), cols = x.cols();
            Tensor out = Tensor::zeros({rows, 1});
            for (std::size_t r = 0; r < rows; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < cols; ++c) {
                    const double v = x.at(r, c);
                    s += v * v;
                }
                out[r] = std::sqrt(s);
            }
            n.value = std::move(out);
            break;
        }

        case Op::kLerp: {
            const Tensor& u = arg(0);
            const Tensor& v = arg(1);
            const Tensor& c = arg(2);
            Tensor out = u;
            if (c.rank() == 0) {
                const double a = c.item();
                for (std::size_t i = 0; i < out.numel(); ++i)
                    out[i] = a * u[i] + (1.0 - a) * v[i];
            } else {
                const std::size_t f = u.cols();
                for (std::size_t r = 0; r < u.rows(); ++r) {
                    const double a = c.at(r, 0);
                    for (std::size_t col = 0; col < f; ++col)
                        out.at(r, col) = a * u.at(r, col) + (1.0 - a) * v.at(r, col);
                }
            }
            n.value = std::move(out);
            break;
        }
    }
    n.has_value = true;
}

// ---------------------------------------------------------------------------
// backward

std::unordered_map<std::string, Tensor> Graph::backward(NodeId out) {
    check_id(out);
    if (!forward_ran_ || forward_out_ != out || !nodes_[out].has_value) {
        throw state_error("backward(" + std::to_string(out) +
                          ") requires a completed forward() at that node");
    }
    if (!nodes_[out].shape.empty()) {
        throw shape_error("backward requires a scalar output, " + describe(out) + " has shape " +
                          nodes_[out].value.shape_string());
    }

    for (std::size_t i = 0; i <= out; ++i) {
        Node& n = nodes_[i];
        if (!reachable_[i]) continue;
        n.grad = Tensor::zeros(n.shape);
        n.has_grad = true;
    }
    nodes_[out].grad = Tensor::scalar(1.0);

    for (std::size_t i = out + 1; i-- > 0;) {
        if (reachable_[i]) backprop_node(i);
    }

    // constants are not differentiable leaves: their gradient is zero by
    // definition, whatever the sweep accumulated into the slot
    for (std::size_t i = 0; i <= out; ++i) {
        Node& n = nodes_[i];
        if (reachable_[i] && n.op == Op::kConstant) n.grad = Tensor::zeros(n.shape);
    }

    std::unordered_map<std::string, Tensor> grads;
    for (const auto& [name, id] : input_ids_) {
        const Node& n = nodes_[id];
        grads.emplace(name, n.has_grad ? n.grad : Tensor::zeros(n.shape));
    }
    return grads;
}

void Graph::backprop_node(NodeId id) {
    Node& n = nodes_[id];
    if (n.op == Op::kInput || n.op == Op::kConstant) return;
    const Tensor& g = n.grad;
    auto val = [&](std::size_t k) -> const Tensor& { return nodes_[n.args[k]].value; };
    auto acc = [&](std::size_t k) -> Tensor& { return nodes_[n.args[k]].grad; };

    switch (n.op) {
        case Op::kInput:
        case Op::kConstant:
            return;

        case Op::kMatmul: {
            const Tensor& a = val(0);
            const Tensor& b = val(1);
            Tensor da, db;
            if (!n.trans_a && !n.trans_b) {
                da = ad::matmul(g, b, false, true);  // dY * B^T
                db = ad::matmul(a, g, true, false);  // A^T * dY
            } else if (n.trans_a && !n.trans_b) {
                da = ad::matmul(b, g, false, true);  // B * dY^T
                db = ad::matmul(a, g, false, false); // A * dY
            } else if (!n.trans_a && n.trans_b) {
                da = ad::matmul(g, b, false, false); // dY * B
                db = ad::matmul(g, a, true, false);  // dY^T * A
            } else {
                da = ad::matmul(b, g, true, true);   // B^T * dY^T
                db = ad::matmul(g, a, true, true);   // dY^T * A^T
            }
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += da[i];
            Tensor& gb = acc(1);
            for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += db[i];
            break;
        }

        case Op::kAdd: {
            for (std::size_t k = 0; k < 2; ++k) {
                Tensor& ga = acc(k);
                if (ga.same_shape(g)) {
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g[i];
                } else {
                    // broadcast (f) vector: sum the upstream gradient over rows
                    const std::size_t f = ga.numel();
                    for (std::size_t i = 0; i < g.numel(); ++i) ga[i % f] += g[i];
                }
            }
            break;
        }

        case Op::kMul: {
            const Tensor& a = val(0);
            const Tensor& b = val(1);
            if (a.same_shape(b)) {
                Tensor& ga = acc(0);
                Tensor& gb = acc(1);
                for (std::size_t i = 0; i < g.numel(); ++i) {
                    ga[i] += g[i] * b[i];
                    gb[i] += g[i] * a[i];
                }
            } else {
                const std::size_t si = a.rank() == 0 ? 0 : 1; // scalar argument index
                const Tensor& scal = si == 0 ? a : b;
                const Tensor& full = si == 0 ? b : a;
                Tensor& gs = acc(si);
                Tensor& gf = acc(1 - si);
                const double s = scal.item();
                for (std::size_t i = 0; i < g.numel(); ++i) {
                    gs[0] += g[i] * full[i];
                    gf[i] += g[i] * s;
                }
            }
            break;
        }

        case Op::kNeg: {
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] -= g[i];
            break;
        }

        case Op::kLeakyRelu: {
            const Tensor& x = val(0);
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i)
                ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : n.slope);
            break;
        }

        case Op::kTanh: {
            const Tensor& y = n.value;
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
            break;
        }

        case Op::kSoftplus: {
            const Tensor& x = val(0);
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * stable_sigmoid(x[i]);
            break;
        }

        case Op::kSigmoid: {
            const Tensor& y = n.value;
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
            break;
        }

        case Op::kLog: {
            const Tensor& x = val(0);
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] / x[i];
            break;
        }

        case Op::kSquare: {
            const Tensor& x = val(0);
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * 2.0 * x[i];
            break;
        }

        case Op::kSqrt: {
            const Tensor& y = n.value;
            Tensor& ga = acc(0);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * 0.5 / y[i];
            break;
        }

        case Op::kSum: {
            Tensor& ga = acc(0);
            const double gv = g.item();
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gv;
            break;
        }

        case Op::kMean: {
            Tensor& ga = acc(0);
            const double gv = g.item() / static_cast<double>(ga.numel());
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gv;
            break;
        }

        case Op::kFeatureL2Norm: {
            const Tensor& x = val(0);
            const Tensor& y = n.value;
            Tensor& ga = acc(0);
            const std::size_t cols = x.cols();
            for (std::size_t r = 0; r < x.rows(); ++r) {
                const double norm = y[r];
                if (norm <= 0.0) continue; // subgradient 0 at the origin
                const double gr = g[r] / norm;
                for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += gr * x.at(r, c);
            }
            break;
        }

        case Op::kLerp: {
            const Tensor& u = val(0);
            const Tensor& v = val(1);
            const Tensor& c = val(2);
            Tensor& gu = acc(0);
            Tensor& gv = acc(1);
            Tensor& gc = acc(2);
            if (c.rank() == 0) {
                const double a = c.item();
                for (std::size_t i = 0; i < g.numel(); ++i) {
                    gu[i] += g[i] * a;
                    gv[i] += g[i] * (1.0 - a);
                    gc[0] += g[i] * (u[i] - v[i]);
                }
            } else {
                const std::size_t f = u.cols();
                for (std::size_t r = 0; r < u.rows(); ++r) {
                    const double a = c.at(r, 0);
                    for (std::size_t col = 0; col < f; ++col) {
                        const std::size_t i = r * f + col;
                        gu[i] += g[i] * a;
                        gv[i] += g[i] * (1.0 - a);
                        gc[r] += g[i] * (u[i] - v[i]);
                    }
                }
            }
            break;
        }
    }
}

const Tensor& Graph::value(NodeId id) const {
    const Node& n = node(id);
    if (!n.has_value) {
        throw state_error("value of " + describe(id) + " requested before forward()");
    }
    return n.value;
}

const Tensor& Graph::grad(NodeId id) const {
    const Node& n = node(id);
    if (!n.has_grad) {
        throw state_error("gradient of " + describe(id) + " requested before backward()");
    }
    return n.grad;
}

// ---------------------------------------------------------------------------
// gradient check

double gradient_check(Graph& g, NodeId out, const Bindings& bindings, double eps) {
    if (!(eps > 0.0) || eps > 1e-2) {
        throw config_error("gradient_check eps must lie in (0, 1e-2], got " +
                           std::to_string(eps));
    }
    g.forward(bindings, out);
    auto grads = g.backward(out);

    double max_rel = 0.0;
    for (const auto& [name, base] : bindings) {
        const Tensor& analytic = grads.at(name);
        Bindings perturbed = bindings;
        for (std::size_t i = 0; i < base.numel(); ++i) {
            Tensor& t = perturbed.at(name);
            const double orig = t[i];
            t[i] = orig + eps;
            const double f_plus = g.forward(perturbed, out).item();
            t[i] = orig - eps;
            const double f_minus = g.forward(perturbed, out).item();
            t[i] = orig;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double denom =
                std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
            const double rel = std::abs(analytic[i] - numeric) / denom;
            if (rel > max_rel) max_rel = rel;
        }
    }
    // restore graph state at the unperturbed point
    g.forward(bindings, out);
    g.backward(out);
    return max_rel;
}

} // namespace criticbench::ad
