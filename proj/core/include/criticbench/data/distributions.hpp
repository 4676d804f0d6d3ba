#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "criticbench/data/sample_set.hpp"

namespace criticbench::data {

enum class DistributionKind { kGaussianMixture, kRing, kUniformBox };

const char* distribution_kind_name(DistributionKind k);
DistributionKind distribution_kind_from_name(const std::string& s);

struct MixtureComponent {
    std::vector<double> mean;        // length d
    std::vector<double> covariance;  // d*d row-major, symmetric positive definite
    double weight = 0.0;
};

// Ground-truth synthetic distribution. Exactly one parameter block is used,
// selected by `kind`:
//   gaussian-mixture : components (weights sum to 1)
//   ring             : radius + isotropic gaussian noise, always 2-D
//   uniform-box      : independent uniforms on [lo_i, hi_i]
struct DistributionSpec {
    DistributionKind kind = DistributionKind::kGaussianMixture;
    std::size_t dimension = 0;

    std::vector<MixtureComponent> components;

    double ring_radius = 1.0;
    double ring_noise = 0.0;

    std::vector<double> box_lo;
    std::vector<double> box_hi;

    // Throws config_error with the offending field path on invalid parameters.
    void validate() const;

    // Convenience constructors for the specs used throughout the harness.
    static DistributionSpec standard_normal(std::size_t d);
    // k equal-weight isotropic gaussians with standard deviation sigma spaced
    // evenly on a circle of the given radius (2-D).
    static DistributionSpec gaussian_ring(std::size_t k, double radius, double sigma);
    static DistributionSpec ring(double radius, double noise);
    static DistributionSpec uniform_box(std::vector<double> lo, std::vector<double> hi);
};

// n i.i.d. draws; bit-identical output for equal (spec, n, seed). Mixture
// draws carry per-row component labels on the returned set.
SampleSet sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed,
                 Role role = Role::kTrain, const std::string& label = "");

enum class CorruptionKind { kAdditiveNoise, kModeDrop, kIntensityShift, kBlurTowardMean };

const char* corruption_kind_name(CorruptionKind k);
CorruptionKind corruption_kind_from_name(const std::string& s);

// Controlled degradation applied to a sample set. level = 0 is the identity
// for every kind.
struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::kAdditiveNoise;
    double level = 0.0;

    void validate() const;
};

// Applies the corruption. Mode-drop requires component labels (mixture-
// sourced sets only): floor(level * k) components are dropped, capped at
// k - 1, taking the highest component indices first; rows from dropped
// components are replaced by uniform redraws (with replacement) from the
// surviving rows so the sample count stays fixed.
SampleSet corrupt(const SampleSet& samples, const CorruptionSpec& spec, std::uint64_t seed);

} // namespace criticbench::data
