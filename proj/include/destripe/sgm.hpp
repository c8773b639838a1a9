#pragma once

#include "destripe/image.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace destripe::sgm {

enum class Distribution { Gaussian, Uniform };

Distribution parse_distribution(const std::string& name);
const char* to_string(Distribution d);

inline constexpr int kPolynomialOrder = 3;
inline constexpr std::size_t kFieldCount = kPolynomialOrder + 1;

struct SgmConfig {
    Distribution distribution = Distribution::Gaussian;
    /// sigma (Gaussian) or mu (Uniform) is drawn uniformly from this range,
    /// once per (batch item, order).
    double intensity_min = 0.02;
    double intensity_max = 0.12;
    int order = kPolynomialOrder;
    bool clamp_output = true;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Column-constant coefficient matrix A_m: `height` repeats of `row`.
struct StripeField {
    int order = 0;
    double intensity = 0.0;
    std::size_t height = 0;
    std::vector<float> row;

    std::size_t width() const noexcept { return row.size(); }
    float at(std::size_t /*r*/, std::size_t c) const { return row[c]; }
    /// Dense (1, height, width) view of the field.
    ImageTensor matrix() const;
};

/// Fields indexed by order m = 0..3.
using StripeSet = std::array<StripeField, kFieldCount>;

/// Draws A_m for one batch item. Stream (seed, batch_index, m): draw 0 picks
/// the intensity, draws from 1 onward produce the W coefficients.
StripeField sample_stripe_field(const SgmConfig& cfg, int m, std::size_t height, std::size_t width,
                                std::uint64_t batch_index);

StripeSet sample_stripe_set(const SgmConfig& cfg, std::size_t height, std::size_t width,
                            std::uint64_t batch_index);

/// I_S = I_C + A3^3 I_C + A2^2 I_C + A1 I_C + A0 (elementwise), applied to
/// every batch item of `clean`.
ImageTensor apply_sgm(const ImageTensor& clean, const StripeSet& fields, bool clamp_output = true);

struct SimulationResult {
    ImageTensor stripy;
    std::vector<StripeSet> fields;  // one set per batch item
};

/// Item k uses stream batch index `first_index + k`.
SimulationResult simulate_batch(const ImageTensor& cleans, const SgmConfig& cfg, unsigned threads = 1,
                                std::uint64_t first_index = 0);

}  // namespace destripe::sgm
