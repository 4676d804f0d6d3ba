#include "criticbench/metrics/inception_score.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "criticbench/errors.hpp"
#include "criticbench/metrics/gaussian_fid.hpp"

namespace criticbench::metrics {

double inception_style_score(const ad::Tensor& class_probs) {
    if (class_probs.rank() != 2) {
        throw shape_error("inception_style_score: expected a (n, K) matrix, got shape " +
                          class_probs.shape_string());
    }
    const std::size_t n = class_probs.rows();
    const std::size_t k = class_probs.cols();
    if (n == 0) {
        throw config_error("inception_style_score: need at least one row");
    }
    if (k < 2) {
        throw config_error("inception_style_score: need K >= 2 classes, got " +
                           std::to_string(k));
    }

    std::vector<double> marginal(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = class_probs.at(i, j);
            if (p < 0.0) {
                throw domain_error("inception_style_score: negative probability " +
                                   std::to_string(p) + " in row " + std::to_string(i));
            }
            row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > 1e-6) {
            throw domain_error("inception_style_score: row " + std::to_string(i) +
                               " sums to " + std::to_string(row_sum) +
                               ", not 1 within 1e-6");
        }
        for (std::size_t j = 0; j < k; ++j) {
            marginal[j] += class_probs.at(i, j);
        }
    }
    for (std::size_t j = 0; j < k; ++j) marginal[j] /= static_cast<double>(n);

    double mean_kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double kl = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = class_probs.at(i, j);
            if (p > 0.0) {
                // marginal[j] >= p / n > 0 whenever p > 0, so the log is safe
                kl += p * std::log(p / marginal[j]);
            }
        }
        mean_kl += kl;
    }
    mean_kl /= static_cast<double>(n);

    return std::exp(mean_kl);
}

ad::Tensor mixture_class_probabilities(const data::DistributionSpec& spec,
                                       const ad::Tensor& samples) {
    if (spec.kind != data::DistributionKind::kGaussianMixture) {
        throw config_error(
            "mixture_class_probabilities: distribution must be a gaussian mixture");
    }
    spec.validate();
    if (samples.rank() != 2 || samples.cols() != spec.dimension) {
        throw shape_error("mixture_class_probabilities: expected a (n, " +
                          std::to_string(spec.dimension) + ") matrix, got shape " +
                          samples.shape_string());
    }
    const std::size_t d = spec.dimension;
    const std::size_t k = spec.components.size();
    const std::size_t n = samples.rows();

    // Per component: log weight - 0.5 (d log 2pi + log det) and the inverse
    // covariance, via the symmetric eigendecomposition.
    std::vector<double> log_norm(k);
    std::vector<ad::Tensor> inverses;
    inverses.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        const auto& comp = spec.components[c];
        ad::Tensor cov = ad::Tensor::matrix(d, d, comp.covariance);
        ad::Tensor vecs;
        const std::vector<double> eig = jacobi_eigen_symmetric(cov, vecs);
        double log_det = 0.0;
        for (double v : eig) {
            if (v <= 0.0) {
                throw config_error("mixture_class_probabilities: component " +
                                   std::to_string(c) +
                                   " covariance is not positive definite");
            }
            log_det += std::log(v);
        }
        ad::Tensor inv = ad::Tensor::zeros({d, d});
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double s = 0.0;
                for (std::size_t m = 0; m < d; ++m) {
                    s += vecs.at(i, m) * vecs.at(j, m) / eig[m];
                }
                inv.at(i, j) = s;
            }
        }
        inverses.push_back(std::move(inv));
        log_norm[c] = std::log(comp.weight) -
                      0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI) + log_det);
    }

    ad::Tensor probs = ad::Tensor::zeros({n, k});
    std::vector<double> log_p(k);
    std::vector<double> delta(d);
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < d; ++i) {
                delta[i] = samples.at(row, i) - spec.components[c].mean[i];
            }
            double quad = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    quad += delta[i] * inverses[c].at(i, j) * delta[j];
                }
            }
            log_p[c] = log_norm[c] - 0.5 * quad;
        }
        const double peak = *std::max_element(log_p.begin(), log_p.end());
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            log_p[c] = std::exp(log_p[c] - peak);
            total += log_p[c];
        }
        for (std::size_t c = 0; c < k; ++c) probs.at(row, c) = log_p[c] / total;
    }
    return probs;
}

} // namespace criticbench::metrics
