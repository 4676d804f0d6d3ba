#pragma once

#include "criticbench/ad/tensor.hpp"
#include "criticbench/data/distributions.hpp"

namespace criticbench::metrics {

// Inception-style score over an (n, K) matrix of per-sample class
// probabilities: exp of the average KL divergence between each row and the
// batch marginal p(y) (the column mean). 0*log(0) is taken as 0. The score
// lies in [1, K]; it reaches K only when every row is one-hot and the
// marginal is uniform. Rows must sum to 1 within 1e-6 and K must be >= 2.
double inception_style_score(const ad::Tensor& class_probs);

// Desk-scale stand-in for the pretrained classifier behind the score: the
// ground-truth mixture's component posterior p(component | x), one row per
// sample in (n, d) `samples`. Requires a gaussian-mixture spec whose
// component covariances are positive definite; throws config_error
// otherwise. Rows sum to 1 and feed inception_style_score directly.
ad::Tensor mixture_class_probabilities(const data::DistributionSpec& spec,
                                       const ad::Tensor& samples);

} // namespace criticbench::metrics
