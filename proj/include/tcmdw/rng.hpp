#pragma once

#include <cstdint>

namespace tcmdw {

// splitmix64: the fixed 64-bit generator behind the data generator. Written
// out in full so generated datasets are byte-identical on any platform:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Modulo bias is below 2^-40 for the n used here and
    // identical everywhere, which is what matters for reproducibility.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

}  // namespace tcmdw
