#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace destripe {

/// Stateless counter-based generator. Draw i of a stream is
/// splitmix64_mix(key + (i+1) * 0x9E3779B97F4A7C15), i.e. the i-th output of
/// SplitMix64 started at `key`. Any draw can be computed independently, so
/// results never depend on evaluation order or thread count.
class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// key = mix(mix(mix(seed) ^ (a+1)*G) ^ (b+1)*G)
    static constexpr CounterRng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
        std::uint64_t key = mix(seed);
        key = mix(key ^ ((a + 1) * kGolden));
        key = mix(key ^ ((b + 1) * kGolden));
        return CounterRng(key);
    }

    constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t key() const noexcept { return key_; }

    constexpr std::uint64_t bits(std::uint64_t i) const noexcept { return mix(key_ + (i + 1) * kGolden); }

    /// [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t i) const noexcept {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    /// Standard normal from draws 2j+1 and 2j+2 (Box-Muller, cosine branch).
    double normal(std::uint64_t j) const noexcept {
        const double u1 = 1.0 - uniform(2 * j + 1);  // (0, 1]
        const double u2 = uniform(2 * j + 2);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
};

}  // namespace destripe
