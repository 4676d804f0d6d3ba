#include "criticbench/metrics/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "criticbench/ad/graph.hpp"
#include "criticbench/ad/mlp_graph.hpp"
#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::metrics {

namespace {

constexpr double kGcClamp = 1e-7;

void require_nonempty(std::span<const double> real, std::span<const double> fake,
                      const char* op) {
    if (real.empty() || fake.empty()) {
        throw shape_error(std::string(op) +
                          ": real and fake output lists must be nonempty");
    }
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

double gc_objective(std::span<const double> real_outputs,
                    std::span<const double> fake_outputs) {
    require_nonempty(real_outputs, fake_outputs, "gc_objective");
    const auto check_domain = [](std::span<const double> v, const char* side) {
        for (double x : v) {
            if (!(x > 0.0 && x < 1.0)) {
                throw domain_error("gc_objective: " + std::string(side) + " output " +
                                   std::to_string(x) +
                                   " outside (0, 1); GC expects sigmoid-head outputs");
            }
        }
    };
    check_domain(real_outputs, "real");
    check_domain(fake_outputs, "fake");

    const auto clamp = [](double x) {
        return std::min(std::max(x, kGcClamp), 1.0 - kGcClamp);
    };
    double sum_real = 0.0;
    for (double r : real_outputs) sum_real += std::log(clamp(r));
    double sum_fake = 0.0;
    for (double f : fake_outputs) sum_fake += std::log1p(-clamp(f));
    return sum_real / static_cast<double>(real_outputs.size()) +
           sum_fake / static_cast<double>(fake_outputs.size());
}

double ls_objective(std::span<const double> real_outputs,
                    std::span<const double> fake_outputs, double a, double b) {
    require_nonempty(real_outputs, fake_outputs, "ls_objective");
    double sum_real = 0.0;
    for (double r : real_outputs) sum_real += (r - b) * (r - b);
    double sum_fake = 0.0;
    for (double f : fake_outputs) sum_fake += (f - a) * (f - a);
    return -(sum_real / static_cast<double>(real_outputs.size())) -
           (sum_fake / static_cast<double>(fake_outputs.size()));
}

double iw_objective(std::span<const double> real_outputs,
                    std::span<const double> fake_outputs) {
    require_nonempty(real_outputs, fake_outputs, "iw_objective");
    return mean_of(real_outputs) - mean_of(fake_outputs);
}

double gradient_penalty(const models::CriticNetwork& critic,
                        const ad::Tensor& real_batch, const ad::Tensor& fake_batch,
                        std::uint64_t seed) {
    if (real_batch.rank() != 2 || fake_batch.rank() != 2) {
        throw shape_error("gradient_penalty: batches must be rank-2, got " +
                          real_batch.shape_string() + " and " +
                          fake_batch.shape_string());
    }
    if (real_batch.rows() != fake_batch.rows() ||
        real_batch.cols() != fake_batch.cols()) {
        throw shape_error("gradient_penalty: batch shapes differ, " +
                          real_batch.shape_string() + " vs " +
                          fake_batch.shape_string());
    }
    if (real_batch.cols() != critic.input_dim()) {
        throw shape_error("gradient_penalty: batch dimension " +
                          std::to_string(real_batch.cols()) +
                          " does not match critic input width " +
                          std::to_string(critic.input_dim()));
    }
    const std::size_t n = real_batch.rows();

    ad::Graph g;
    ad::NodeId xr = g.input("xr", {n, real_batch.cols()});
    ad::NodeId xf = g.input("xf", {n, real_batch.cols()});
    ad::NodeId t = g.input("t", {n, 1});
    ad::MlpParams p = critic.add_params(g, "d.");
    ad::NodeId penalty = models::append_gradient_penalty(g, p, xr, xf, t, critic.arch());

    SplitMix64 rng(derive_seed(seed, seed_salt::kInterpolation));
    ad::Tensor t_batch = ad::Tensor::zeros({n, 1});
    for (std::size_t i = 0; i < n; ++i) t_batch[i] = rng.next_unit();

    ad::Bindings b;
    models::bind_params(b, p, critic.parameters());
    b.insert_or_assign("xr", real_batch);
    b.insert_or_assign("xf", fake_batch);
    b.insert_or_assign("t", std::move(t_batch));
    return g.forward(b, penalty).item();
}

} // namespace criticbench::metrics
