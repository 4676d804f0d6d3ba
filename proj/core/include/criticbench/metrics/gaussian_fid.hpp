#pragma once

#include <cstddef>

#include "criticbench/ad/tensor.hpp"
#include "criticbench/data/sample_set.hpp"

namespace criticbench::metrics {

// First two moments of a sample batch, the inputs of the Frechet distance.
// The covariance is stored fully materialized and is exactly symmetric by
// construction (upper triangle computed once and mirrored).
struct GaussianStats {
    ad::Tensor mean;        // (d) vector
    ad::Tensor covariance;  // (d, d) symmetric, divisor n - 1

    std::size_t dim() const { return mean.numel(); }
};

// Sample mean and covariance (divisor n - 1). Requires n >= 2 rows.
GaussianStats gaussian_stats(const ad::Tensor& samples);
GaussianStats gaussian_stats(const data::SampleSet& samples);

// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
// `vectors` receives the orthonormal eigenvectors as columns; the return
// value holds the eigenvalues in the matching order (unsorted).
std::vector<double> jacobi_eigen_symmetric(const ad::Tensor& a, ad::Tensor& vectors);

// Symmetric PSD square root via eigendecomposition. The input must be
// symmetric within tolerance; eigenvalues in [-1e-10, 0) are clipped to 0 and
// substantially negative ones are rejected. The result R is symmetric and
// satisfies ||R*R - A||_F <= 1e-8 * (1 + ||A||_F).
ad::Tensor matrix_sqrt_psd(const ad::Tensor& a);

// Frechet distance between Gaussians:
//   ||m_p - m_q||^2 + Tr(C_p + C_q - 2*(C_p^{1/2} C_q C_p^{1/2})^{1/2})
// with the cross term in its symmetrized form so the square root stays real
// PSD. Values within rounding below zero are clamped to exactly 0.
double fid(const GaussianStats& p, const GaussianStats& q);

} // namespace criticbench::metrics
