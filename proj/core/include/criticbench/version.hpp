#pragma once

namespace criticbench {

inline constexpr const char* kVersion = "0.1.0";

// Name of the counter-based PRNG used for every seeded draw. Recorded in
// result metadata so runs can be reproduced on other platforms.
inline constexpr const char* kRngAlgorithm = "splitmix64";

} // namespace criticbench
