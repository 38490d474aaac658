#pragma once

#include <cstdint>

namespace adpcm {

// Deterministic PRNG with a portable output mapping. std::uniform_real_distribution
// is implementation-defined, which would break the bit-exact reproducibility
// contract across toolchains, so random draws go through this instead.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [-1, 1).
    double next_symmetric() { return next_unit() * 2.0 - 1.0; }
};

// Stable combiner for deriving per-frame seeds from (global seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 rng(seed ^ (index + 1) * 0x9e3779b97f4a7c15ULL);
    return rng.next();
}

} // namespace adpcm
