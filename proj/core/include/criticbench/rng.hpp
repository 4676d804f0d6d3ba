#pragma once

#include <cmath>
#include <cstdint>

namespace criticbench {

// Counter-based 64-bit PRNG (splitmix64, Steele et al.). Chosen because the
// whole stream is a pure function of the seed: identical seeds give identical
// draws on every platform, which the determinism contract of the sample and
// result formats relies on.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_open_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller on this stream. Generates pairs and
    // caches the second value.
    double next_gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_open_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n). n must be positive. Uses rejection to stay
    // unbiased, so the draw count can vary per call; determinism per seed is
    // unaffected.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Deterministically derives an independent sub-stream seed from a base seed
// and a purpose salt. Every seeded component draws from its own derived
// stream so that adding draws to one stage never shifts another.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    SplitMix64 rng(base ^ (salt * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
    return rng.next_u64();
}

// Purpose salts for derive_seed.
namespace seed_salt {
inline constexpr std::uint64_t kDataSample = 1;
inline constexpr std::uint64_t kCorruption = 2;
inline constexpr std::uint64_t kNoisePrior = 3;
inline constexpr std::uint64_t kWeightInit = 4;
inline constexpr std::uint64_t kMinibatch = 5;
inline constexpr std::uint64_t kFakeDraw = 6;
inline constexpr std::uint64_t kInterpolation = 7;
inline constexpr std::uint64_t kEvaluation = 8;
inline constexpr std::uint64_t kSplit = 9;
inline constexpr std::uint64_t kBandwidth = 10;
} // namespace seed_salt

} // namespace criticbench
