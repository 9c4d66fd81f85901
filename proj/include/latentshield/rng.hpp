#pragma once

#include <cstdint>

namespace latentshield {

// One application of the splitmix64 mixing function. Also the stateless
// hash used for seed-portable weight generation: the stream generator
// below produces splitmix64(seed), splitmix64(seed + GAMMA), ...
inline std::uint64_t splitmix64(std::uint64_t s) {
    std::uint64_t z = s + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Maps a 64-bit word to [0,1) using the top 53 bits.
inline double unit_from_u64(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

/// Deterministic splitmix64 stream. All randomness in the project flows
/// through this type so results are reproducible from a single seed.
struct SplitMix64 {
    std::uint64_t state = 0;

    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t out = splitmix64(state);
        state += 0x9E3779B97F4A7C15ULL;
        return out;
    }

    double next_unit() { return unit_from_u64(next_u64()); }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// N(0, sigma^2) via Box-Muller; consumes two uniforms per pair and
    /// caches the spare so the draw count is deterministic.
    double next_gaussian(double sigma);

    /// Integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n)) % n;
    }

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace latentshield
