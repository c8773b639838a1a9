#pragma once

#include "destripe/image.hpp"
#include "destripe/metrics.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace destripe::losses {

struct LossWeights {
    double alpha = 0.84;  ///< MS-SSIM share of the mixed distance
    double lambda1 = 1.0;    ///< adversarial
    double lambda2 = 100.0;  ///< stripe-branch cycle (vertical gradients)
    double lambda3 = 10.0;   ///< clean-branch cycle
    double lambda4 = 10.0;   ///< identity
    double lambda5 = 10.0;   ///< cross-domain (HBGM + perceptual)
    double k = 0.001;        ///< perceptual share inside the cross-domain term
    double eps_log = 1e-7;   ///< log-argument clamp for the adversarial term

    void validate() const;
};

/// Feature map (batch, channels, height, width), row-major.
struct FeatureTensor {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;
};

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual FeatureTensor extract(const ImageTensor& x) const = 0;
    virtual std::string name() const = 0;
};

/// Features are the pixels themselves: (B, 1, H, W).
class IdentityExtractor final : public FeatureExtractor {
public:
    FeatureTensor extract(const ImageTensor& x) const override;
    std::string name() const override { return "identity"; }
};

/// Deterministic random-weight convolution stack.
///
///   layer 0: 3x3 conv, 1 -> 8 channels, valid padding, bias, ReLU
///   layer 1: 3x3 conv, 8 -> 8 channels, valid padding, bias, ReLU
///
/// Output is (B, 8, H-4, W-4). For layer l with fan_in = in_channels * 9 and
/// bound = 1/sqrt(fan_in), weight i (order [out][in][ky][kx]) is
/// bound * (2 u_i - 1) with u from CounterRng::stream(seed, l, 0), and bias o
/// is bound * (2 u_o - 1) with u from CounterRng::stream(seed, l, 1).
/// Convolution is cross-correlation accumulated in double, stored as float.
class FixedSeedConvStack final : public FeatureExtractor {
public:
    static constexpr std::uint64_t kDefaultSeed = 0x5EED;
    static constexpr std::size_t kChannels = 8;
    static constexpr std::size_t kKernel = 3;

    explicit FixedSeedConvStack(std::uint64_t seed = kDefaultSeed);

    FeatureTensor extract(const ImageTensor& x) const override;
    std::string name() const override { return "convstack"; }

    struct Layer {
        std::size_t in_channels = 0;
        std::size_t out_channels = 0;
        std::vector<double> weights;  // [out][in][ky][kx]
        std::vector<double> bias;
    };
    const std::array<Layer, 2>& layers() const noexcept { return layers_; }

private:
    std::array<Layer, 2> layers_;
};

/// "identity" or "convstack".
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name);

/// Discriminator probabilities for D(C), D(G(S_hat)) and D(G(S)).
struct ScoreSet {
    ImageTensor d_real;
    ImageTensor d_fake_hat_s;
    ImageTensor d_fake_s;
};

/// Gradient maps in [-1,1] mapped to [0,1] by (g+1)/2.
ImageTensor rescale_gradient(const ImageTensor& g);

/// Affine map of both tensors to [0,1] using their joint min/max; a flat pair
/// maps to zeros.
std::pair<ImageTensor, ImageTensor> normalize_joint(const ImageTensor& a, const ImageTensor& b);

double loss_cyc_clean(const ImageTensor& clean, const ImageTensor& clean_cycled, const LossWeights& w);
double loss_cyc_stripe(const ImageTensor& stripy, const ImageTensor& stripy_cycled, const LossWeights& w);
double loss_hbgm(const ImageTensor& stripy, const ImageTensor& clean_hat, std::size_t levels, const LossWeights& w);
double loss_perceptual(const ImageTensor& stripy, const ImageTensor& clean_hat, const FeatureExtractor& f);
double loss_identity(const ImageTensor& clean, const ImageTensor& clean_identity, const LossWeights& w);
/// Sum of the three expectation terms, natural log, scores clamped to
/// [eps, 1-eps]. Scores outside [0,1] are rejected.
double loss_adversarial(const ScoreSet& scores, const LossWeights& w = {});
double loss_cross(double l_h, double l_perc, const LossWeights& w);
double loss_total(double l_adv, double l_cyc_s, double l_cyc_c, double l_iden, double l_cross, const LossWeights& w);

struct LossInputs {
    ImageTensor clean;           ///< C
    ImageTensor clean_cycled;    ///< C~ = G(SGM(C))
    ImageTensor stripy;          ///< S
    ImageTensor stripy_cycled;   ///< S~ = SGM(G(S))
    ImageTensor clean_hat;       ///< C^ = G(S)
    ImageTensor clean_identity;  ///< G(C)
    ScoreSet scores;
};

struct LossComponents {
    double cyc_c = 0.0;
    double cyc_s = 0.0;
    double l_h = 0.0;
    double l_perc = 0.0;
    double l_iden = 0.0;
    double l_adv = 0.0;
    double l_cross = 0.0;
    double l_total = 0.0;
};

LossComponents evaluate_losses(const LossInputs& in, const LossWeights& w, std::size_t hbgm_levels,
                               const FeatureExtractor& extractor);

}  // namespace destripe::losses
