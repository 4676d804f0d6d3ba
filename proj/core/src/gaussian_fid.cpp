#include "criticbench/metrics/gaussian_fid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "criticbench/errors.hpp"

namespace criticbench::metrics {

namespace {

double frobenius_norm(const ad::Tensor& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

void require_square(const ad::Tensor& a, const char* who) {
    if (a.rank() != 2 || a.rows() != a.cols()) {
        throw shape_error(std::string(who) + ": expected a square matrix, got shape " +
                          a.shape_string());
    }
}

void require_symmetric(const ad::Tensor& a, const char* who) {
    double max_abs = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) max_abs = std::max(max_abs, std::abs(a[i]));
    const double tol = 1e-8 * (1.0 + max_abs);
    const std::size_t d = a.rows();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (std::abs(a.at(i, j) - a.at(j, i)) > tol) {
                throw domain_error(std::string(who) + ": input not symmetric at (" +
                                   std::to_string(i) + ", " + std::to_string(j) + "): " +
                                   std::to_string(a.at(i, j)) + " vs " +
                                   std::to_string(a.at(j, i)));
            }
        }
    }
}

} // namespace

GaussianStats gaussian_stats(const ad::Tensor& samples) {
    if (samples.rank() != 2) {
        throw shape_error("gaussian_stats: expected a (n, d) matrix, got shape " +
                          samples.shape_string());
    }
    const std::size_t n = samples.rows();
    const std::size_t d = samples.cols();
    if (n < 2) {
        throw config_error("gaussian_stats: need at least 2 samples, got " +
                           std::to_string(n));
    }

    ad::Tensor mean = ad::Tensor::zeros({d});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += samples.at(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);

    ad::Tensor cov = ad::Tensor::zeros({d, d});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            const double da = samples.at(i, a) - mean[a];
            for (std::size_t b = a; b < d; ++b) {
                cov.at(a, b) += da * (samples.at(i, b) - mean[b]);
            }
        }
    }
    const double divisor = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            cov.at(a, b) /= divisor;
            cov.at(b, a) = cov.at(a, b);
        }
    }
    return GaussianStats{std::move(mean), std::move(cov)};
}

GaussianStats gaussian_stats(const data::SampleSet& samples) {
    return gaussian_stats(samples.data());
}

std::vector<double> jacobi_eigen_symmetric(const ad::Tensor& a, ad::Tensor& vectors) {
    require_square(a, "jacobi_eigen_symmetric");
    require_symmetric(a, "jacobi_eigen_symmetric");

    const std::size_t d = a.rows();
    ad::Tensor m = a;  // working copy, reduced toward diagonal
    vectors = ad::Tensor::zeros({d, d});
    for (std::size_t i = 0; i < d; ++i) vectors.at(i, i) = 1.0;

    const double scale = frobenius_norm(a);
    const double off_target = (scale == 0.0 ? 0.0 : 1e-14 * scale);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) off += m.at(p, q) * m.at(p, q);
        }
        if (std::sqrt(2.0 * off) <= off_target) break;

        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that zeroes m[p][q] (Golub & Van Loan 8.4).
                const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < d; ++k) {
                    const double mkp = m.at(k, p);
                    const double mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double mpk = m.at(p, k);
                    const double mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = vectors.at(k, p);
                    const double vkq = vectors.at(k, q);
                    vectors.at(k, p) = c * vkp - s * vkq;
                    vectors.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<double> eigenvalues(d);
    for (std::size_t i = 0; i < d; ++i) eigenvalues[i] = m.at(i, i);
    return eigenvalues;
}

ad::Tensor matrix_sqrt_psd(const ad::Tensor& a) {
    require_square(a, "matrix_sqrt_psd");
    require_symmetric(a, "matrix_sqrt_psd");

    const std::size_t d = a.rows();
    ad::Tensor v;
    std::vector<double> eig = jacobi_eigen_symmetric(a, v);

    const double scale = frobenius_norm(a);
    const double floor = -1e-10 * (1.0 + scale);
    for (std::size_t i = 0; i < d; ++i) {
        if (eig[i] < floor) {
            throw domain_error("matrix_sqrt_psd: eigenvalue " + std::to_string(eig[i]) +
                               " is substantially negative (not PSD)");
        }
        eig[i] = std::sqrt(std::max(eig[i], 0.0));
    }

    // R = V diag(sqrt(eig)) V^T, mirrored so rounding cannot break symmetry.
    ad::Tensor r = ad::Tensor::zeros({d, d});
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += v.at(i, k) * eig[k] * v.at(j, k);
            r.at(i, j) = s;
            r.at(j, i) = s;
        }
    }
    return r;
}

double fid(const GaussianStats& p, const GaussianStats& q) {
    const std::size_t d = p.dim();
    if (q.dim() != d) {
        throw shape_error("fid: dimension mismatch: " + std::to_string(d) + " vs " +
                          std::to_string(q.dim()));
    }

    double mean_term = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double delta = p.mean[i] - q.mean[i];
        mean_term += delta * delta;
    }

    double trace_p = 0.0, trace_q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        trace_p += p.covariance.at(i, i);
        trace_q += q.covariance.at(i, i);
    }

    // Symmetrized cross term: (C_p^{1/2} C_q C_p^{1/2})^{1/2} is the square
    // root of a symmetric PSD matrix even when C_p C_q itself is not
    // symmetric.
    const ad::Tensor root_p = matrix_sqrt_psd(p.covariance);
    ad::Tensor inner = ad::matmul(ad::matmul(root_p, q.covariance), root_p);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double s = 0.5 * (inner.at(i, j) + inner.at(j, i));
            inner.at(i, j) = s;
            inner.at(j, i) = s;
        }
    }
    const ad::Tensor cross_root = matrix_sqrt_psd(inner);
    double trace_cross = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace_cross += cross_root.at(i, i);

    double value = mean_term + trace_p + trace_q - 2.0 * trace_cross;
    if (value < 0.0) {
        if (value < -1e-8 * (1.0 + trace_p + trace_q)) {
            throw domain_error("fid: result " + std::to_string(value) +
                               " is negative beyond rounding");
        }
        value = 0.0;
    }
    return value;
}

} // namespace criticbench::metrics
