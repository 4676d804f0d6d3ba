#pragma once

#include <cstdint>
#include <span>

#include "criticbench/ad/tensor.hpp"
#include "criticbench/models/critic.hpp"

namespace criticbench::metrics {

// Goodfellow criterion J = mean(log r) + mean(log(1 - f)) over critic outputs
// on a real and a fake batch. Outputs must lie strictly inside (0, 1) (sigmoid
// head); they are additionally clamped to [1e-7, 1 - 1e-7] before the logs
// because a saturated 64-bit sigmoid can round to exactly 0 or 1 downstream.
// P = Q optimum is -2 log 2; the supremum at perfect separation is 0.
double gc_objective(std::span<const double> real_outputs,
                    std::span<const double> fake_outputs);

// Least-squares criterion J = -mean((r - b)^2) - mean((f - a)^2) over raw
// (linear-head) critic outputs, with the real target b and fake target a.
// Maximum 0 at perfect separation; the P = Q optimum with b = 1, a = 0 is
// -1/2, attained by the constant critic D* = 1/2.
double ls_objective(std::span<const double> real_outputs,
                    std::span<const double> fake_outputs, double a = 0.0,
                    double b = 1.0);

// IPM / Wasserstein criterion J = mean(r) - mean(f) over raw critic outputs.
// Depends only on the gap of the means, so it is invariant under adding a
// constant to every output.
double iw_objective(std::span<const double> real_outputs,
                    std::span<const double> fake_outputs);

// Mean of (||grad_x D(x_hat)||_2 - 1)^2 over per-row interpolates
// x_hat_i = u_i * real_i + (1 - u_i) * fake_i with u_i ~ Uniform(0, 1) drawn
// from the seeded interpolation stream. The batches must have equal shape and
// match the critic's input width; the critic's activation must be smooth.
double gradient_penalty(const models::CriticNetwork& critic,
                        const ad::Tensor& real_batch, const ad::Tensor& fake_batch,
                        std::uint64_t seed);

} // namespace criticbench::metrics
