#include "criticbench/models/train_gan.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "criticbench/ad/graph.hpp"
#include "criticbench/ad/mlp_graph.hpp"
#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::models {

void TrainConfig::validate() const {
    if (!(lr_d > 0.0) || !(lr_g > 0.0)) {
        throw config_error("train.lr_d/lr_g: learning rates must be positive");
    }
    if (d_steps < 1 || g_steps < 1) {
        throw config_error("train.d_steps/g_steps: ratio components must be >= 1");
    }
    if (batch < 1) throw config_error("train.batch: must be >= 1");
    if (cycles < 1) throw config_error("train.cycles: must be >= 1");
    if (penalty_weight < 0.0) throw config_error("train.penalty_weight: must be >= 0");
    if (!(ls_a < ls_b)) throw config_error("train.ls_a/ls_b: a < b required");
    if (momentum < 0.0 || momentum >= 1.0) {
        throw config_error("train.momentum: must lie in [0, 1)");
    }
}

namespace {

void fill_gaussian(ad::Tensor& t, SplitMix64& rng) {
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.next_gaussian();
}

} // namespace

TrainedGan train_toy_gan(const data::SampleSet& data, const TrainConfig& cfg,
                         const CriticArch& critic_arch, const GeneratorArch& gen_arch) {
    cfg.validate();
    if (data.role() != data::Role::kTrain) {
        throw config_error("train_toy_gan: data role must be train, got " +
                           std::string(data::role_name(data.role())));
    }
    const std::size_t d = data.dim();
    if (critic_arch.widths.front() != d) {
        throw config_error("critic.widths: input width " +
                           std::to_string(critic_arch.widths.front()) +
                           " does not match data dimension " + std::to_string(d));
    }
    if (gen_arch.widths.back() != d) {
        throw config_error("generator.widths: output width " +
                           std::to_string(gen_arch.widths.back()) +
                           " does not match data dimension " + std::to_string(d));
    }

    CriticNetwork critic = CriticNetwork::initialized(
        critic_arch, cfg.criterion, derive_seed(derive_seed(cfg.seed, seed_salt::kWeightInit), 1));
    GeneratorModel gen = GeneratorModel::neural(
        gen_arch, derive_seed(derive_seed(cfg.seed, seed_salt::kWeightInit), 2));

    const std::size_t m = cfg.batch;
    const std::size_t zdim = gen_arch.noise_dim;
    const bool iw = cfg.criterion == Criterion::kIW;

    // --- discriminator update graph: inputs are a real and a fake batch ---
    ad::Graph dg;
    ad::NodeId xr = dg.input("xr", {m, d});
    ad::NodeId xf = dg.input("xf", {m, d});
    ad::MlpParams dp = critic.add_params(dg, "d.");
    ad::MlpApplication app_r =
        append_mlp_forward(dg, dp, xr, critic_arch.activation, ad::OutputHead::kLinear);
    ad::MlpApplication app_f =
        append_mlp_forward(dg, dp, xf, critic_arch.activation, ad::OutputHead::kLinear);
    ad::NodeId penalty = 0;
    if (iw) {
        ad::NodeId t = dg.input("t", {m, 1});
        penalty = append_gradient_penalty(dg, dp, xr, xf, t, critic_arch);
    }
    ad::NodeId d_loss = append_critic_loss(dg, cfg.criterion, app_r.raw, app_f.raw, penalty,
                                           cfg.penalty_weight, cfg.ls_a, cfg.ls_b);

    // --- generator update graph: noise through G, scored by D ---
    ad::Graph gg;
    ad::NodeId z = gg.input("z", {m, zdim});
    ad::MlpParams gp = gen.add_params(gg, "g.");
    ad::MlpApplication app_g =
        append_mlp_forward(gg, gp, z, gen_arch.activation, ad::OutputHead::kLinear);
    ad::MlpParams dp_g = critic.add_params(gg, "d.");
    ad::MlpApplication app_dg = append_mlp_forward(gg, dp_g, app_g.raw,
                                                   critic_arch.activation,
                                                   ad::OutputHead::kLinear);
    ad::NodeId g_loss = 0;
    switch (cfg.criterion) {
        case Criterion::kGC:
            // original minimax: minimize mean(log(1 - D(G(z)))) = -softplus(raw)
            g_loss = gg.neg(gg.mean(gg.softplus(app_dg.raw)));
            break;
        case Criterion::kLS:
            g_loss = gg.mean(
                gg.square(gg.add(app_dg.raw, gg.constant(ad::Tensor::vector({-cfg.ls_b})))));
            break;
        case Criterion::kIW:
            g_loss = gg.neg(gg.mean(app_dg.raw));
            break;
    }

    SplitMix64 mb_rng(derive_seed(cfg.seed, seed_salt::kMinibatch));
    SplitMix64 noise_rng(derive_seed(cfg.seed, seed_salt::kNoisePrior));
    SplitMix64 interp_rng(derive_seed(cfg.seed, seed_salt::kInterpolation));

    std::vector<double> vel_d(critic.param_count(), 0.0);
    std::vector<double> vel_g(CriticNetwork::param_count_for(gen_arch.widths), 0.0);

    TrainTelemetry telemetry;
    telemetry.d_objective.reserve(cfg.cycles);
    telemetry.g_loss.reserve(cfg.cycles);
    double last_finite = std::numeric_limits<double>::quiet_NaN();

    ad::Tensor real_batch = ad::Tensor::zeros({m, d});
    ad::Tensor z_batch = ad::Tensor::zeros({m, zdim});
    ad::Tensor t_batch = ad::Tensor::zeros({m, 1});

    for (std::size_t cycle = 0; cycle < cfg.cycles; ++cycle) {
        double cycle_d_obj = 0.0;
        for (std::size_t s = 0; s < cfg.d_steps; ++s) {
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t src = mb_rng.next_below(data.size());
                for (std::size_t j = 0; j < d; ++j) {
                    real_batch.at(i, j) = data.data().at(src, j);
                }
            }
            fill_gaussian(z_batch, noise_rng);
            ad::Tensor fake =
                mlp_forward(z_batch, gen.arch().widths, gen.parameters(), gen_arch.activation);

            ad::Bindings b;
            bind_params(b, dp, critic.parameters());
            b.insert_or_assign("xr", real_batch);
            b.insert_or_assign("xf", std::move(fake));
            if (iw) {
                for (std::size_t i = 0; i < m; ++i) t_batch[i] = interp_rng.next_unit();
                b.insert_or_assign("t", t_batch);
            }
            const double loss = dg.forward(b, d_loss).item();
            if (!std::isfinite(loss)) {
                throw train_abort(cycle, last_finite,
                                  "discriminator loss became non-finite at cycle " +
                                      std::to_string(cycle));
            }
            last_finite = loss;
            cycle_d_obj = -loss;
            auto grads = dg.backward(d_loss);
            sgd_step(critic.mutable_parameters(), vel_d, dp, grads, -cfg.lr_d, cfg.momentum);
        }

        double cycle_g_loss = 0.0;
        for (std::size_t s = 0; s < cfg.g_steps; ++s) {
            fill_gaussian(z_batch, noise_rng);
            ad::Bindings b;
            bind_params(b, gp, gen.parameters());
            bind_params(b, dp_g, critic.parameters());
            b.insert_or_assign("z", z_batch);
            const double loss = gg.forward(b, g_loss).item();
            if (!std::isfinite(loss)) {
                throw train_abort(cycle, last_finite,
                                  "generator loss became non-finite at cycle " +
                                      std::to_string(cycle));
            }
            last_finite = loss;
            cycle_g_loss = loss;
            auto grads = gg.backward(g_loss);
            sgd_step(gen.mutable_parameters(), vel_g, gp, grads, -cfg.lr_g, cfg.momentum);
        }

        telemetry.d_objective.push_back(cycle_d_obj);
        telemetry.g_loss.push_back(cycle_g_loss);
    }

    return TrainedGan{std::move(gen), std::move(critic), std::move(telemetry)};
}

} // namespace criticbench::models
