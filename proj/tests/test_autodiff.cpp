// Tests for the reverse-mode autodiff engine: forward oracles, backward
// oracles, finite-difference properties over random smooth graphs, and the
// symbolic input-gradient (double backprop) path used by the gradient
// penalty.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "criticbench/ad/graph.hpp"
#include "criticbench/ad/mlp_graph.hpp"
#include "criticbench/ad/tensor.hpp"
#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

using namespace criticbench;
using namespace criticbench::ad;

namespace {

Tensor random_tensor(SplitMix64& rng, const std::vector<std::size_t>& shape) {
    Tensor t = Tensor::zeros(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.next_gaussian();
    return t;
}

Bindings random_mlp_bindings(SplitMix64& rng, const MlpParams& p, double scale = 0.6) {
    Bindings b;
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        Tensor w = random_tensor(rng, {p.layer_sizes[l], p.layer_sizes[l + 1]});
        for (std::size_t i = 0; i < w.numel(); ++i) w[i] *= scale;
        b.emplace(p.weight_name(l), std::move(w));
        Tensor bias = random_tensor(rng, {p.layer_sizes[l + 1]});
        for (std::size_t i = 0; i < bias.numel(); ++i) bias[i] *= scale;
        b.emplace(p.bias_name(l), std::move(bias));
    }
    return b;
}

} // namespace

TEST_CASE("forward: log(sigmoid(w.x)) at zero weight is log(1/2)") {
    Graph g;
    NodeId w = g.input("w", {1, 1});
    NodeId x = g.input("x", {1, 1});
    NodeId out = g.log(g.sigmoid(g.matmul(x, w)));
    Bindings b{{"w", Tensor::matrix(1, 1, {0.0})}, {"x", Tensor::matrix(1, 1, {1.0})}};
    const Tensor& y = g.forward(b, out);
    CHECK(y[0] == doctest::Approx(-0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("forward: mean(square(v)) hand oracle") {
    Graph g;
    NodeId v = g.input("v", {3});
    NodeId out = g.mean(g.square(v));
    Bindings b{{"v", Tensor::vector({1.0, 2.0, 3.0})}};
    CHECK(g.forward(b, out).item() == doctest::Approx(14.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("forward: identity graph returns the binding") {
    Graph g;
    NodeId x = g.input("x", {1});
    Bindings b{{"x", Tensor::vector({2.5})}};
    CHECK(g.forward(b, x)[0] == 2.5);
}

TEST_CASE("forward is bit-deterministic") {
    Graph g;
    NodeId x = g.input("x", {4, 3});
    MlpParams p = add_mlp_params(g, {3, 5, 1});
    MlpApplication app = append_mlp_forward(g, p, x, Activation::kTanh, OutputHead::kSigmoid);
    NodeId loss = g.mean(g.log(app.out));

    SplitMix64 rng(7);
    Bindings b = random_mlp_bindings(rng, p);
    b.emplace("x", random_tensor(rng, {4, 3}));

    Tensor first = g.forward(b, loss);
    Tensor second = g.forward(b, loss);
    REQUIRE(first.numel() == second.numel());
    CHECK(std::memcmp(first.data().data(), second.data().data(),
                      first.numel() * sizeof(double)) == 0);
}

TEST_CASE("backward: d(x^2)/dx = 2x") {
    Graph g;
    NodeId x = g.input("x", {});
    NodeId out = g.square(x);
    Bindings b{{"x", Tensor::scalar(3.0)}};
    g.forward(b, out);
    auto grads = g.backward(out);
    CHECK(grads.at("x").item() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("backward: d log(sigmoid(x)) / dx at 0 is 1/2") {
    Graph g;
    NodeId x = g.input("x", {});
    NodeId out = g.log(g.sigmoid(x));
    Bindings b{{"x", Tensor::scalar(0.0)}};
    g.forward(b, out);
    auto grads = g.backward(out);
    CHECK(grads.at("x").item() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("backward: mean distributes 1/n") {
    Graph g;
    NodeId x = g.input("x", {4});
    NodeId out = g.mean(x);
    Bindings b{{"x", Tensor::vector({9.0, -2.0, 0.5, 4.0})}};
    g.forward(b, out);
    auto grads = g.backward(out);
    for (std::size_t i = 0; i < 4; ++i) CHECK(grads.at("x")[i] == 0.25);
}

TEST_CASE("backward: unused inputs get zero gradients") {
    Graph g;
    NodeId x = g.input("x", {2});
    g.input("unused", {3, 2});
    NodeId out = g.sum(g.square(x));
    Bindings b{{"x", Tensor::vector({1.0, 2.0})},
               {"unused", Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6})}};
    g.forward(b, out);
    auto grads = g.backward(out);
    const Tensor& gu = grads.at("unused");
    CHECK(gu.shape() == std::vector<std::size_t>{3, 2});
    for (std::size_t i = 0; i < gu.numel(); ++i) CHECK(gu[i] == 0.0);
}

TEST_CASE("backward: gradients of constants are exactly zero") {
    Graph g;
    NodeId x = g.input("x", {2});
    NodeId c = g.constant(Tensor::vector({5.0, -1.0}));
    NodeId out = g.sum(g.mul(x, c));
    Bindings b{{"x", Tensor::vector({2.0, 3.0})}};
    g.forward(b, out);
    g.backward(out);
    const Tensor& gc = g.grad(c);
    CHECK(gc[0] == 0.0);
    CHECK(gc[1] == 0.0);
    // while we are here: d(sum(x*c))/dx = c
    auto grads = g.backward(out);
    CHECK(grads.at("x")[0] == 5.0);
    CHECK(grads.at("x")[1] == -1.0);
}

TEST_CASE("matmul forward handles every transpose combination") {
    Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
    Tensor b = Tensor::matrix(2, 2, {5, 6, 7, 8});
    auto expect = [](const Tensor& t, std::vector<double> want) {
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(t[i] == want[i]);
    };
    expect(matmul(a, b, false, false), {19, 22, 43, 50});
    expect(matmul(a, b, true, false), {26, 30, 38, 44});
    expect(matmul(a, b, false, true), {17, 23, 39, 53});
    expect(matmul(a, b, true, true), {23, 31, 34, 46});
}

TEST_CASE("broadcast add: (batch, f) + (f) and its backward") {
    Graph g;
    NodeId m = g.input("m", {2, 3});
    NodeId v = g.input("v", {3});
    NodeId out = g.sum(g.add(m, v));
    Bindings b{{"m", Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6})},
               {"v", Tensor::vector({10, 20, 30})}};
    const Tensor& y = g.forward(b, out);
    CHECK(y.item() == doctest::Approx(1 + 2 + 3 + 4 + 5 + 6 + 2 * 60).epsilon(1e-14));
    auto grads = g.backward(out);
    // the vector gradient sums over the batch axis
    for (std::size_t i = 0; i < 3; ++i) CHECK(grads.at("v")[i] == 2.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(grads.at("m")[i] == 1.0);
}

TEST_CASE("lerp endpoints and row coefficients") {
    Graph g;
    NodeId u = g.input("u", {2, 2});
    NodeId v = g.input("v", {2, 2});
    NodeId t = g.input("t", {2, 1});
    NodeId out = g.lerp(u, v, t);
    Bindings b{{"u", Tensor::matrix(2, 2, {1, 1, 1, 1})},
               {"v", Tensor::matrix(2, 2, {3, 3, 3, 3})},
               {"t", Tensor::matrix(2, 1, {1.0, 0.25})}};
    const Tensor& y = g.forward(b, out);
    // row 0: coefficient 1 -> u exactly; row 1: 0.25*1 + 0.75*3 = 2.5
    CHECK(y.at(0, 0) == 1.0);
    CHECK(y.at(0, 1) == 1.0);
    CHECK(y.at(1, 0) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(y.at(1, 1) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("leaky_relu forward and backward away from the kink") {
    Graph g;
    NodeId x = g.input("x", {3});
    NodeId out = g.sum(g.leaky_relu(x));
    Bindings b{{"x", Tensor::vector({2.0, -5.0, 0.5})}};
    const Tensor& y = g.forward(b, out);
    CHECK(y.item() == doctest::Approx(2.0 - 1.0 + 0.5).epsilon(1e-14));
    auto grads = g.backward(out);
    CHECK(grads.at("x")[0] == 1.0);
    CHECK(grads.at("x")[1] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(grads.at("x")[2] == 1.0);
    // finite differences agree away from 0
    CHECK(gradient_check(g, out, b, 1e-6) < 1e-7);
}

TEST_CASE("feature_l2norm forward oracle") {
    Graph g;
    NodeId x = g.input("x", {2, 2});
    NodeId out = g.feature_l2norm(x);
    Bindings b{{"x", Tensor::matrix(2, 2, {3, 4, 0, 0})}};
    const Tensor& y = g.forward(b, out);
    CHECK(y[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(y[1] == 0.0);
}

TEST_CASE("error: shape mismatch names the offending node") {
    Graph g;
    NodeId a = g.input("a", {2, 3});
    NodeId b = g.input("b", {2, 3});
    CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("matmul inner dimensions"),
                         shape_error);
    CHECK_THROWS_AS(g.add(a, g.input("c", {4})), shape_error);
}

TEST_CASE("error: unbound input, log domain, backward misuse") {
    Graph g;
    NodeId x = g.input("x", {2});
    NodeId out = g.log(x);
    CHECK_THROWS_AS(g.forward({}, out), config_error);

    Bindings bad{{"x", Tensor::vector({1.0, -1.0})}};
    CHECK_THROWS_AS(g.forward(bad, out), criticbench::domain_error);

    Bindings ok{{"x", Tensor::vector({1.0, 2.0})}};
    g.forward(ok, out);
    CHECK_THROWS_AS(g.backward(out), shape_error); // non-scalar output

    Graph g2;
    NodeId y = g2.input("y", {});
    NodeId out2 = g2.square(y);
    CHECK_THROWS_AS(g2.backward(out2), state_error); // forward not run
    CHECK_THROWS_AS(g2.value(out2), state_error);
}

TEST_CASE("error: duplicate input name rejected") {
    Graph g;
    g.input("x", {2});
    CHECK_THROWS_AS(g.input("x", {3}), config_error);
}

TEST_CASE("gradient_check: quadratic is exact under central differences") {
    Graph g;
    NodeId x = g.input("x", {});
    NodeId out = g.square(x);
    Bindings b{{"x", Tensor::scalar(3.0)}};
    CHECK(gradient_check(g, out, b, 1e-5) < 1e-8);
}

TEST_CASE("gradient_check: full GC objective on a 2-layer critic") {
    // J = mean(log D(x)) + mean(log(1 - D(y))), D = sigmoid head over tanh MLP
    Graph g;
    NodeId xr = g.input("x_real", {5, 2});
    NodeId xf = g.input("x_fake", {5, 2});
    MlpParams p = add_mlp_params(g, {2, 6, 1});
    MlpApplication dr = append_mlp_forward(g, p, xr, Activation::kTanh, OutputHead::kLinear);
    MlpApplication df = append_mlp_forward(g, p, xf, Activation::kTanh, OutputHead::kLinear);
    // log(sigmoid(s)) = -softplus(-s); log(1 - sigmoid(s)) = -softplus(s)
    NodeId j = g.add(g.neg(g.mean(g.softplus(g.neg(dr.raw)))),
                     g.neg(g.mean(g.softplus(df.raw))));

    SplitMix64 rng(11);
    Bindings b = random_mlp_bindings(rng, p);
    b.emplace("x_real", random_tensor(rng, {5, 2}));
    b.emplace("x_fake", random_tensor(rng, {5, 2}));
    CHECK(gradient_check(g, j, b, 1e-5) < 1e-4);
}

TEST_CASE("input gradient: linear critic and the (norm - 1)^2 penalty") {
    Graph g;
    NodeId x = g.input("x", {3, 2});
    MlpParams p = add_mlp_params(g, {2, 1});
    MlpApplication app = append_mlp_forward(g, p, x, Activation::kTanh, OutputHead::kLinear);
    NodeId ig = append_mlp_input_gradient(g, p, app, Activation::kTanh);
    NodeId norm = g.feature_l2norm(ig);
    NodeId penalty = g.mean(g.square(g.add(norm, g.constant(Tensor::vector({-1.0})))));

    Bindings b{{"x", Tensor::matrix(3, 2, {0.3, -1.0, 2.0, 0.1, -0.5, 0.7})},
               {"W0", Tensor::matrix(2, 1, {3.0, 4.0})},
               {"b0", Tensor::vector({0.25})}};
    g.forward(b, penalty);
    // every row's input gradient is w = [3, 4]
    const Tensor& gi = g.value(ig);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(gi.at(r, 0) == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(gi.at(r, 1) == doctest::Approx(4.0).epsilon(1e-14));
    }
    CHECK(g.value(norm)[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(g.value(penalty).item() == doctest::Approx(16.0).epsilon(1e-12));

    // an exactly 1-Lipschitz linear critic has zero penalty at every point
    Bindings unit = b;
    unit.at("W0") = Tensor::matrix(2, 1, {0.6, 0.8});
    CHECK(g.forward(unit, penalty).item() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("input gradient: tanh critic at zero, penalty stationary in scale") {
    // D(x) = tanh(s*x) in one dimension; at x = 0 the input gradient is s and
    // the penalty (|s| - 1)^2 has zero derivative at s = 1.
    Graph g;
    NodeId x = g.input("x", {1, 1});
    MlpParams p = add_mlp_params(g, {1, 1, 1}, "c.");
    MlpApplication app = append_mlp_forward(g, p, x, Activation::kTanh, OutputHead::kLinear);
    NodeId ig = append_mlp_input_gradient(g, p, app, Activation::kTanh);
    NodeId norm = g.feature_l2norm(ig);
    NodeId penalty = g.mean(g.square(g.add(norm, g.constant(Tensor::vector({-1.0})))));

    // c.W0 = s (scale inside tanh), c.W1 = 1 (outer weight), biases 0
    Bindings b{{"x", Tensor::matrix(1, 1, {0.0})},
               {"c.W0", Tensor::matrix(1, 1, {1.0})},
               {"c.b0", Tensor::vector({0.0})},
               {"c.W1", Tensor::matrix(1, 1, {1.0})},
               {"c.b1", Tensor::vector({0.0})}};
    g.forward(b, penalty);
    CHECK(g.value(ig)[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.value(penalty).item() == doctest::Approx(0.0).epsilon(1e-14));

    auto grads = g.backward(penalty);
    CHECK(std::abs(grads.at("c.W0")[0]) < 1e-12); // minimum of the penalty
}

TEST_CASE("double differentiation matches finite differences over weights") {
    // Invariant: for D(x) = tanh(w.x), the analytic d/dw of
    // (dD/dx - 1)^2 matches central differences with relative error < 1e-3.
    Graph g;
    NodeId x = g.input("x", {4, 3});
    MlpParams p = add_mlp_params(g, {3, 4, 1});
    MlpApplication app = append_mlp_forward(g, p, x, Activation::kTanh, OutputHead::kLinear);
    NodeId ig = append_mlp_input_gradient(g, p, app, Activation::kTanh);
    NodeId norm = g.feature_l2norm(ig);
    NodeId penalty = g.mean(g.square(g.add(norm, g.constant(Tensor::vector({-1.0})))));

    SplitMix64 rng(23);
    Bindings b = random_mlp_bindings(rng, p);
    b.emplace("x", random_tensor(rng, {4, 3}));
    CHECK(gradient_check(g, penalty, b, 1e-4) < 1e-3);
}

TEST_CASE("input gradient rejects non-smooth activations") {
    Graph g;
    NodeId x = g.input("x", {2, 2});
    MlpParams p = add_mlp_params(g, {2, 3, 1});
    MlpApplication app =
        append_mlp_forward(g, p, x, Activation::kLeakyRelu, OutputHead::kLinear);
    CHECK_THROWS_AS(append_mlp_input_gradient(g, p, app, Activation::kLeakyRelu),
                    config_error);
}

TEST_CASE("mlp forward matches a by-hand layer computation") {
    Graph g;
    NodeId x = g.input("x", {1, 2});
    MlpParams p = add_mlp_params(g, {2, 2, 1});
    MlpApplication app = append_mlp_forward(g, p, x, Activation::kTanh, OutputHead::kSigmoid);

    Bindings b{{"x", Tensor::matrix(1, 2, {1.0, -2.0})},
               {"W0", Tensor::matrix(2, 2, {0.5, -0.25, 0.1, 0.3})},
               {"b0", Tensor::vector({0.05, -0.1})},
               {"W1", Tensor::matrix(2, 1, {1.5, -0.7})},
               {"b1", Tensor::vector({0.2})}};
    const Tensor& y = g.forward(b, app.out);

    const double z0 = 1.0 * 0.5 + (-2.0) * 0.1 + 0.05;
    const double z1 = 1.0 * (-0.25) + (-2.0) * 0.3 + (-0.1);
    const double a0 = std::tanh(z0), a1 = std::tanh(z1);
    const double raw = a0 * 1.5 + a1 * (-0.7) + 0.2;
    const double want = 1.0 / (1.0 + std::exp(-raw));
    CHECK(y[0] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("property: backward matches finite differences on 100 random smooth graphs") {
    SplitMix64 rng(20260813);
    int worst_form = -1;
    double worst = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        const std::size_t d = 1 + rng.next_below(3);
        const std::size_t h = 1 + rng.next_below(4);
        const std::size_t batch = 1 + rng.next_below(5);
        const Activation act =
            rng.next_below(2) == 0 ? Activation::kTanh : Activation::kSoftplus;
        const int form = static_cast<int>(rng.next_below(8));

        Graph g;
        NodeId x = g.input("x", {batch, d});
        MlpParams p = add_mlp_params(g, {d, h, 1});
        MlpApplication app = append_mlp_forward(g, p, x, act, OutputHead::kLinear);

        NodeId loss = 0;
        Bindings b = random_mlp_bindings(rng, p);
        b.emplace("x", random_tensor(rng, {batch, d}));
        switch (form) {
            case 0: loss = g.mean(g.square(app.raw)); break;
            case 1: loss = g.mean(g.softplus(app.raw)); break;
            case 2: loss = g.mul(g.sum(g.sigmoid(app.raw)), g.constant(Tensor::scalar(0.5)));
                    break;
            case 3: loss = g.mean(g.log(g.sigmoid(app.raw))); break;
            case 4: loss = g.mean(g.sqrt(g.add(g.square(app.raw),
                                               g.constant(Tensor::ones({1})))));
                    break;
            case 5: { // elementwise product of two applications sharing weights
                NodeId x2 = g.input("x2", {batch, d});
                MlpApplication app2 =
                    append_mlp_forward(g, p, x2, act, OutputHead::kLinear);
                loss = g.mean(g.mul(app.raw, app2.raw));
                b.emplace("x2", random_tensor(rng, {batch, d}));
                break;
            }
            case 6: { // interpolation feeding the critic
                NodeId x2 = g.input("x2", {batch, d});
                NodeId t = g.input("t", {batch, 1});
                NodeId mix = g.lerp(x, x2, t);
                MlpApplication am = append_mlp_forward(g, p, mix, act, OutputHead::kLinear);
                loss = g.mean(g.neg(am.raw));
                b.emplace("x2", random_tensor(rng, {batch, d}));
                Tensor tv = Tensor::zeros({batch, 1});
                for (std::size_t i = 0; i < batch; ++i) tv[i] = rng.next_unit();
                b.emplace("t", std::move(tv));
                break;
            }
            default: { // gradient-penalty composition
                NodeId ig = append_mlp_input_gradient(g, p, app, act);
                NodeId norm = g.feature_l2norm(ig);
                loss = g.mean(g.square(g.add(norm, g.constant(Tensor::vector({-1.0})))));
                break;
            }
        }
        const double err = gradient_check(g, loss, b, 1e-5);
        if (err > worst) {
            worst = err;
            worst_form = form;
        }
    }
    INFO("worst relative error ", worst, " at loss form ", worst_form);
    CHECK(worst < 1e-4);
}
