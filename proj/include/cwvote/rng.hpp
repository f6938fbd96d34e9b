#pragma once

#include <cstdint>
#include <limits>

namespace cwvote {

// SplitMix64. Cheap to construct, so every observation (and every study
// replication) gets its own substream keyed by (seed, index); results do not
// depend on how work is scheduled across threads.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Derive an independent substream seed from a parent seed and an index.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    SplitMix64 mix(parent ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    mix();
    return mix();
}

} // namespace cwvote
