#pragma once

#include <cstdint>

namespace specgap {

// Counter-based generator built on the splitmix64 finalizer.
// Every draw is a pure function of (seed, stream, t), so sample i of run j
// is reproducible without storing generator state, and parallel or
// re-ordered evaluation cannot change results.

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t draw_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t t) {
    return mix64(mix64(seed + kGolden * (stream + 1)) + kGolden * (t + 1));
}

// Uniform on [0, 1) with 53 random bits.
inline double draw_unit(std::uint64_t seed, std::uint64_t stream, std::uint64_t t) {
    return static_cast<double>(draw_u64(seed, stream, t) >> 11) * 0x1.0p-53;
}

} // namespace specgap
