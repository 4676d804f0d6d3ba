#include "criticbench/data/distributions.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "criticbench/errors.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::data {

namespace {

std::string fmt_level(double level) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", level);
    return buf;
}

// Lower-triangular Cholesky factor of a d-by-d SPD matrix (row-major).
// Throws config_error naming `field` when the matrix is not positive
// definite.
std::vector<double> cholesky(const std::vector<double>& a, std::size_t d,
                             const std::string& field) {
    std::vector<double> l(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
            if (i == j) {
                if (s <= 0.0) {
                    throw config_error(field + ": covariance is not positive definite");
                }
                l[i * d + i] = std::sqrt(s);
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    return l;
}

} // namespace

const char* distribution_kind_name(DistributionKind k) {
    switch (k) {
        case DistributionKind::kGaussianMixture: return "gaussian-mixture";
        case DistributionKind::kRing: return "ring";
        case DistributionKind::kUniformBox: return "uniform-box";
    }
    return "?";
}

DistributionKind distribution_kind_from_name(const std::string& s) {
    if (s == "gaussian-mixture") return DistributionKind::kGaussianMixture;
    if (s == "ring") return DistributionKind::kRing;
    if (s == "uniform-box") return DistributionKind::kUniformBox;
    throw config_error("unknown distribution kind '" + s +
                       "' (expected gaussian-mixture | ring | uniform-box)");
}

const char* corruption_kind_name(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::kAdditiveNoise: return "additive-noise";
        case CorruptionKind::kModeDrop: return "mode-drop";
        case CorruptionKind::kIntensityShift: return "intensity-shift";
        case CorruptionKind::kBlurTowardMean: return "blur-toward-mean";
    }
    return "?";
}

CorruptionKind corruption_kind_from_name(const std::string& s) {
    if (s == "additive-noise") return CorruptionKind::kAdditiveNoise;
    if (s == "mode-drop") return CorruptionKind::kModeDrop;
    if (s == "intensity-shift") return CorruptionKind::kIntensityShift;
    if (s == "blur-toward-mean") return CorruptionKind::kBlurTowardMean;
    throw config_error(
        "unknown corruption kind '" + s +
        "' (expected additive-noise | mode-drop | intensity-shift | blur-toward-mean)");
}

void DistributionSpec::validate() const {
    if (dimension == 0) throw config_error("distribution.dimension: must be >= 1");
    switch (kind) {
        case DistributionKind::kGaussianMixture: {
            if (components.empty()) {
                throw config_error("distribution.components: at least one component required");
            }
            double wsum = 0.0;
            for (std::size_t c = 0; c < components.size(); ++c) {
                const std::string path = "distribution.components[" + std::to_string(c) + "]";
                const MixtureComponent& comp = components[c];
                if (comp.weight < 0.0) {
                    throw config_error(path + ".weight: negative weight " +
                                       std::to_string(comp.weight));
                }
                wsum += comp.weight;
                if (comp.mean.size() != dimension) {
                    throw config_error(path + ".mean: length " +
                                       std::to_string(comp.mean.size()) + " != dimension " +
                                       std::to_string(dimension));
                }
                if (comp.covariance.size() != dimension * dimension) {
                    throw config_error(path + ".covariance: expected " +
                                       std::to_string(dimension * dimension) + " entries");
                }
                for (std::size_t i = 0; i < dimension; ++i) {
                    for (std::size_t j = 0; j < i; ++j) {
                        const double diff = std::abs(comp.covariance[i * dimension + j] -
                                                     comp.covariance[j * dimension + i]);
                        if (diff > 1e-9) {
                            throw config_error(path + ".covariance: not symmetric at (" +
                                               std::to_string(i) + "," + std::to_string(j) +
                                               ")");
                        }
                    }
                }
                cholesky(comp.covariance, dimension, path + ".covariance");
            }
            if (std::abs(wsum - 1.0) > 1e-12) {
                throw config_error("distribution.components: weights sum to " +
                                   std::to_string(wsum) + ", expected 1");
            }
            break;
        }
        case DistributionKind::kRing:
            if (dimension != 2) {
                throw config_error("distribution.dimension: ring distributions are 2-D");
            }
            if (ring_radius <= 0.0) {
                throw config_error("distribution.ring_radius: must be positive");
            }
            if (ring_noise < 0.0) {
                throw config_error("distribution.ring_noise: must be >= 0");
            }
            break;
        case DistributionKind::kUniformBox:
            if (box_lo.size() != dimension || box_hi.size() != dimension) {
                throw config_error("distribution.box_lo/box_hi: lengths must equal dimension " +
                                   std::to_string(dimension));
            }
            for (std::size_t i = 0; i < dimension; ++i) {
                if (!(box_lo[i] < box_hi[i])) {
                    throw config_error("distribution.box_lo[" + std::to_string(i) +
                                       "]: lower bound must be below upper bound");
                }
            }
            break;
    }
}

DistributionSpec DistributionSpec::standard_normal(std::size_t d) {
    DistributionSpec s;
    s.kind = DistributionKind::kGaussianMixture;
    s.dimension = d;
    MixtureComponent c;
    c.mean.assign(d, 0.0);
    c.covariance.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) c.covariance[i * d + i] = 1.0;
    c.weight = 1.0;
    s.components.push_back(std::move(c));
    return s;
}

DistributionSpec DistributionSpec::gaussian_ring(std::size_t k, double radius, double sigma) {
    if (k == 0) throw config_error("distribution.components: at least one component required");
    DistributionSpec s;
    s.kind = DistributionKind::kGaussianMixture;
    s.dimension = 2;
    for (std::size_t j = 0; j < k; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) /
                             static_cast<double>(k);
        MixtureComponent c;
        c.mean = {radius * std::cos(angle), radius * std::sin(angle)};
        c.covariance = {sigma * sigma, 0.0, 0.0, sigma * sigma};
        c.weight = 1.0 / static_cast<double>(k);
        s.components.push_back(std::move(c));
    }
    return s;
}

DistributionSpec DistributionSpec::ring(double radius, double noise) {
    DistributionSpec s;
    s.kind = DistributionKind::kRing;
    s.dimension = 2;
    s.ring_radius = radius;
    s.ring_noise = noise;
    return s;
}

DistributionSpec DistributionSpec::uniform_box(std::vector<double> lo, std::vector<double> hi) {
    DistributionSpec s;
    s.kind = DistributionKind::kUniformBox;
    s.dimension = lo.size();
    s.box_lo = std::move(lo);
    s.box_hi = std::move(hi);
    return s;
}

SampleSet sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed, Role role,
                 const std::string& label) {
    spec.validate();
    if (n < 1) throw config_error("sample: n >= 1 required");
    const std::size_t d = spec.dimension;
    SplitMix64 rng(derive_seed(seed, seed_salt::kDataSample));
    ad::Tensor out = ad::Tensor::zeros({n, d});
    const std::string name = label.empty() ? distribution_kind_name(spec.kind) : label;

    switch (spec.kind) {
        case DistributionKind::kGaussianMixture: {
            // per-component Cholesky factors, computed once
            std::vector<std::vector<double>> factors;
            std::vector<double> cumw;
            double acc = 0.0;
            for (std::size_t c = 0; c < spec.components.size(); ++c) {
                factors.push_back(cholesky(spec.components[c].covariance, d,
                                           "distribution.components[" + std::to_string(c) +
                                               "].covariance"));
                acc += spec.components[c].weight;
                cumw.push_back(acc);
            }
            cumw.back() = 1.0; // guard the running sum against roundoff

            std::vector<std::size_t> labels(n);
            std::vector<double> z(d);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng.next_unit();
                std::size_t c = 0;
                while (c + 1 < cumw.size() && u >= cumw[c]) ++c;
                labels[i] = c;
                for (std::size_t j = 0; j < d; ++j) z[j] = rng.next_gaussian();
                const std::vector<double>& l = factors[c];
                const std::vector<double>& mean = spec.components[c].mean;
                for (std::size_t r = 0; r < d; ++r) {
                    double v = mean[r];
                    for (std::size_t j = 0; j <= r; ++j) v += l[r * d + j] * z[j];
                    out.at(i, r) = v;
                }
            }
            return SampleSet(std::move(out), role, name, std::move(labels),
                             spec.components.size());
        }
        case DistributionKind::kRing: {
            for (std::size_t i = 0; i < n; ++i) {
                const double angle = 2.0 * std::numbers::pi * rng.next_unit();
                double x = spec.ring_radius * std::cos(angle);
                double y = spec.ring_radius * std::sin(angle);
                if (spec.ring_noise > 0.0) {
                    x += spec.ring_noise * rng.next_gaussian();
                    y += spec.ring_noise * rng.next_gaussian();
                }
                out.at(i, 0) = x;
                out.at(i, 1) = y;
            }
            return SampleSet(std::move(out), role, name);
        }
        case DistributionKind::kUniformBox: {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    out.at(i, j) = rng.next_uniform(spec.box_lo[j], spec.box_hi[j]);
                }
            }
            return SampleSet(std::move(out), role, name);
        }
    }
    throw config_error("unreachable distribution kind");
}

void CorruptionSpec::validate() const {
    if (!(level >= 0.0) || !std::isfinite(level)) {
        throw config_error("corruption.level: must be a finite value >= 0");
    }
}

SampleSet corrupt(const SampleSet& samples, const CorruptionSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (spec.level == 0.0) return samples; // identity for every kind

    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();
    ad::Tensor out = samples.data();
    SplitMix64 rng(derive_seed(seed, seed_salt::kCorruption));
    const std::string label = samples.source_label() + "~" +
                              corruption_kind_name(spec.kind) + "(" + fmt_level(spec.level) +
                              ")";

    switch (spec.kind) {
        case CorruptionKind::kAdditiveNoise: {
            for (std::size_t i = 0; i < out.numel(); ++i) {
                out[i] += spec.level * rng.next_gaussian();
            }
            break;
        }
        case CorruptionKind::kIntensityShift: {
            for (std::size_t i = 0; i < out.numel(); ++i) out[i] += spec.level;
            break;
        }
        case CorruptionKind::kBlurTowardMean: {
            std::vector<double> mean(d, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) mean[j] += out.at(i, j);
            for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    out.at(i, j) = (1.0 - spec.level) * out.at(i, j) + spec.level * mean[j];
            break;
        }
        case CorruptionKind::kModeDrop: {
            if (!samples.has_component_labels()) {
                throw config_error(
                    "mode-drop requires component labels; only mixture-sourced sample sets "
                    "carry them (they are not persisted to disk)");
            }
            const std::size_t k = samples.n_components();
            std::size_t n_drop = static_cast<std::size_t>(spec.level * static_cast<double>(k));
            if (n_drop >= k) n_drop = k - 1; // always keep at least one component
            if (n_drop == 0) return samples;
            const std::size_t first_dropped = k - n_drop;

            std::vector<std::size_t> kept_rows;
            for (std::size_t i = 0; i < n; ++i) {
                if (samples.component_labels()[i] < first_dropped) kept_rows.push_back(i);
            }
            if (kept_rows.empty()) {
                throw criticbench::domain_error(
                    "mode-drop: no samples from kept components to resample from");
            }
            std::vector<std::size_t> labels = samples.component_labels();
            for (std::size_t i = 0; i < n; ++i) {
                if (samples.component_labels()[i] < first_dropped) continue;
                const std::size_t src = kept_rows[rng.next_below(kept_rows.size())];
                for (std::size_t j = 0; j < d; ++j) out.at(i, j) = samples.data().at(src, j);
                labels[i] = samples.component_labels()[src];
            }
            return SampleSet(std::move(out), samples.role(), label, std::move(labels), k);
        }
    }

    if (samples.has_component_labels()) {
        return SampleSet(std::move(out), samples.role(), label, samples.component_labels(),
                         samples.n_components());
    }
    return SampleSet(std::move(out), samples.role(), label);
}

} // namespace criticbench::data
