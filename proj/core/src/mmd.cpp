#include "criticbench/metrics/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::metrics {

namespace {

void validate_pair(const ad::Tensor& x, const ad::Tensor& s, double sigma) {
    if (x.rank() != 2 || s.rank() != 2) {
        throw shape_error("mmd: sample sets must be rank-2, got " + x.shape_string() +
                          " and " + s.shape_string());
    }
    if (x.cols() != s.cols()) {
        throw shape_error("mmd: dimension mismatch, " + x.shape_string() + " vs " +
                          s.shape_string());
    }
    if (!(sigma > 0.0)) {
        throw domain_error("mmd: kernel bandwidth must be positive, got " +
                           std::to_string(sigma));
    }
}

double squared_distance(const ad::Tensor& a, std::size_t i, const ad::Tensor& b,
                        std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const double diff = a.at(i, k) - b.at(j, k);
        s += diff * diff;
    }
    return s;
}

// Every kernel sum walks (i, j) in the same row-major order, so identical
// inputs produce bitwise-identical sums and the V-statistic cancels to an
// exact 0 when X == S.
double kernel_sum(const ad::Tensor& a, const ad::Tensor& b, double inv_two_sigma_sq,
                  bool skip_diagonal) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            if (skip_diagonal && i == j) continue;
            total += std::exp(-squared_distance(a, i, b, j) * inv_two_sigma_sq);
        }
    }
    return total;
}

} // namespace

double mmd2_biased(const ad::Tensor& x, const ad::Tensor& s, double sigma) {
    validate_pair(x, s, sigma);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    const double n = static_cast<double>(x.rows());
    const double m = static_cast<double>(s.rows());
    const double kxx = kernel_sum(x, x, inv, false) / (n * n);
    const double kss = kernel_sum(s, s, inv, false) / (m * m);
    const double kxs = kernel_sum(x, s, inv, false) / (n * m);
    return kxx + kss - 2.0 * kxs;
}

double mmd2_biased(const data::SampleSet& x, const data::SampleSet& s, double sigma) {
    return mmd2_biased(x.data(), s.data(), sigma);
}

double mmd2_unbiased(const ad::Tensor& x, const ad::Tensor& s, double sigma) {
    validate_pair(x, s, sigma);
    if (x.rows() < 2 || s.rows() < 2) {
        throw shape_error("mmd: the unbiased estimator needs at least 2 samples per "
                          "set, got " +
                          std::to_string(x.rows()) + " and " + std::to_string(s.rows()));
    }
    const double inv = 1.0 / (2.0 * sigma * sigma);
    const double n = static_cast<double>(x.rows());
    const double m = static_cast<double>(s.rows());
    const double kxx = kernel_sum(x, x, inv, true) / (n * (n - 1.0));
    const double kss = kernel_sum(s, s, inv, true) / (m * (m - 1.0));
    const double kxs = kernel_sum(x, s, inv, false) / (n * m);
    return kxx + kss - 2.0 * kxs;
}

double mmd2_unbiased(const data::SampleSet& x, const data::SampleSet& s, double sigma) {
    return mmd2_unbiased(x.data(), s.data(), sigma);
}

double mmd_score(const ad::Tensor& x, const ad::Tensor& s,
                 const std::vector<double>& sigmas, bool unbiased) {
    if (sigmas.empty()) {
        throw config_error("mmd.sigmas: bandwidth list must be nonempty");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double sigma : sigmas) {
        const double v = unbiased ? mmd2_unbiased(x, s, sigma) : mmd2_biased(x, s, sigma);
        best = std::max(best, v);
    }
    return best;
}

double mmd_score(const data::SampleSet& x, const data::SampleSet& s,
                 const std::vector<double>& sigmas, bool unbiased) {
    return mmd_score(x.data(), s.data(), sigmas, unbiased);
}

std::vector<double> median_heuristic_sigmas(const ad::Tensor& x, const ad::Tensor& s,
                                            std::uint64_t seed) {
    validate_pair(x, s, 1.0);
    const std::size_t total = x.rows() + s.rows();
    const std::size_t take = std::min<std::size_t>(500, total);

    // seeded subsample without replacement over the pooled rows
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(seed, seed_salt::kBandwidth));
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(total - i)));
        std::swap(pool[i], pool[j]);
    }

    const auto row_set = [&](std::size_t idx) -> const ad::Tensor& {
        return idx < x.rows() ? x : s;
    };
    const auto row_index = [&](std::size_t idx) {
        return idx < x.rows() ? idx : idx - x.rows();
    };

    std::vector<double> distances;
    distances.reserve(take * (take - 1) / 2);
    for (std::size_t i = 0; i < take; ++i) {
        for (std::size_t j = i + 1; j < take; ++j) {
            const double d2 = [&] {
                const ad::Tensor& a = row_set(pool[i]);
                const ad::Tensor& b = row_set(pool[j]);
                double acc = 0.0;
                for (std::size_t k = 0; k < a.cols(); ++k) {
                    const double diff =
                        a.at(row_index(pool[i]), k) - b.at(row_index(pool[j]), k);
                    acc += diff * diff;
                }
                return acc;
            }();
            distances.push_back(std::sqrt(d2));
        }
    }

    double sigma_hat = 1.0;
    if (!distances.empty()) {
        std::sort(distances.begin(), distances.end());
        const std::size_t c = distances.size();
        const double median = (c % 2 == 1)
                                  ? distances[c / 2]
                                  : 0.5 * (distances[c / 2 - 1] + distances[c / 2]);
        if (median > 0.0) sigma_hat = median;
    }
    return {0.5 * sigma_hat, sigma_hat, 2.0 * sigma_hat, 4.0 * sigma_hat};
}

std::vector<double> median_heuristic_sigmas(const data::SampleSet& x,
                                            const data::SampleSet& s,
                                            std::uint64_t seed) {
    return median_heuristic_sigmas(x.data(), s.data(), seed);
}

} // namespace criticbench::metrics
