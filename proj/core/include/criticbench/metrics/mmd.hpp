#pragma once

#include <cstdint>
#include <vector>

#include "criticbench/ad/tensor.hpp"
#include "criticbench/data/sample_set.hpp"

namespace criticbench::metrics {

// Squared maximum mean discrepancy between sample sets X and S under the
// Gaussian kernel k(u, v) = exp(-||u - v||^2 / (2 sigma^2)).
//
// Biased V-statistic (diagonal terms included):
//   (1/n^2) sum_ij k(x_i, x_j) + (1/m^2) sum_ij k(s_i, s_j)
//   - (2/nm) sum_ij k(x_i, s_j)
// Nonnegative up to rounding, and exactly 0 when X and S hold the same rows
// in the same order: the three kernel sums are computed in one shared loop
// order, so they cancel bitwise.
double mmd2_biased(const ad::Tensor& x, const ad::Tensor& s, double sigma);
double mmd2_biased(const data::SampleSet& x, const data::SampleSet& s, double sigma);

// Unbiased U-statistic variant: diagonals dropped, within-set sums weighted
// by 1/(n(n-1)). Unbiased for the population MMD^2 but can be negative near
// P = Q; the V-statistic above is the reported default.
double mmd2_unbiased(const ad::Tensor& x, const ad::Tensor& s, double sigma);
double mmd2_unbiased(const data::SampleSet& x, const data::SampleSet& s, double sigma);

// The reported MMD score: the maximum of mmd2 over a nonempty bandwidth list.
double mmd_score(const ad::Tensor& x, const ad::Tensor& s,
                 const std::vector<double>& sigmas, bool unbiased = false);
double mmd_score(const data::SampleSet& x, const data::SampleSet& s,
                 const std::vector<double>& sigmas, bool unbiased = false);

// Default bandwidth list {0.5, 1, 2, 4} * sigma_hat, where sigma_hat is the
// median pairwise Euclidean distance within a seeded subsample (at most 500
// points) of the pooled rows of x and s. Falls back to sigma_hat = 1 when the
// median distance is 0 (all subsampled points identical) or when the
// subsample has a single point.
std::vector<double> median_heuristic_sigmas(const ad::Tensor& x, const ad::Tensor& s,
                                            std::uint64_t seed);
std::vector<double> median_heuristic_sigmas(const data::SampleSet& x,
                                            const data::SampleSet& s,
                                            std::uint64_t seed);

} // namespace criticbench::metrics
