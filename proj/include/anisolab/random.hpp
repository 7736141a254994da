#pragma once

// Reproducible random streams.
//
// Every Monte Carlo path owns a private stream keyed by (master seed, path index),
// so estimates never depend on how paths are distributed over worker threads.
// The engine is xoshiro256** seeded through SplitMix64; all variate transforms are
// written out here instead of using <random> distributions, whose output is
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace anisolab {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent sub-seed, e.g. one per radius in a sweep.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(mix64(seed) ^ mix64(tag + 0x632BE59BD9B4E019ULL));
}

class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
        std::uint64_t key = derive_seed(seed, stream_id);
        for (auto& word : s_) {
            key = mix64(key);
            word = key;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [0,1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double exponential() noexcept { return -std::log(uniform_open()); }

    double sign() noexcept { return ((*this)() >> 63) ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace anisolab
