#include "destripe/error.hpp"
#include "destripe/losses.hpp"
#include "destripe/rng.hpp"

#include <algorithm>
#include <cmath>

namespace destripe::losses {

FeatureTensor IdentityExtractor::extract(const ImageTensor& x) const {
    return {x.batch(), 1, x.height(), x.width(), std::vector<float>(x.values().begin(), x.values().end())};
}

FixedSeedConvStack::FixedSeedConvStack(std::uint64_t seed) {
    const std::size_t in_channels[2] = {1, kChannels};
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Layer& layer = layers_[l];
        layer.in_channels = in_channels[l];
        layer.out_channels = kChannels;
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_channels * kKernel * kKernel));
        const auto wrng = CounterRng::stream(seed, l, 0);
        const auto brng = CounterRng::stream(seed, l, 1);
        layer.weights.resize(layer.out_channels * layer.in_channels * kKernel * kKernel);
        for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = bound * (2.0 * wrng.uniform(i) - 1.0);
        layer.bias.resize(layer.out_channels);
        for (std::size_t o = 0; o < layer.bias.size(); ++o) layer.bias[o] = bound * (2.0 * brng.uniform(o) - 1.0);
    }
}

namespace {

FeatureTensor conv_relu(const FeatureTensor& in, const FixedSeedConvStack::Layer& layer) {
    constexpr std::size_t k = FixedSeedConvStack::kKernel;
    FeatureTensor out{in.batch, layer.out_channels, in.height - k + 1, in.width - k + 1, {}};
    out.values.resize(out.batch * out.channels * out.height * out.width);
    for (std::size_t b = 0; b < in.batch; ++b) {
        for (std::size_t o = 0; o < out.channels; ++o) {
            for (std::size_t r = 0; r < out.height; ++r) {
                for (std::size_t c = 0; c < out.width; ++c) {
                    double acc = layer.bias[o];
                    for (std::size_t i = 0; i < in.channels; ++i) {
                        const float* src = in.values.data() + ((b * in.channels + i) * in.height) * in.width;
                        const double* wk = layer.weights.data() + (o * in.channels + i) * k * k;
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                acc += wk[ky * k + kx] * src[(r + ky) * in.width + (c + kx)];
                            }
                        }
                    }
                    out.values[((b * out.channels + o) * out.height + r) * out.width + c] =
                        static_cast<float>(std::max(acc, 0.0));
                }
            }
        }
    }
    return out;
}

}  // namespace

FeatureTensor FixedSeedConvStack::extract(const ImageTensor& x) const {
    if (x.height() < 5 || x.width() < 5) {
        throw Error(ErrorCode::InvalidArgument, "convstack extractor needs H, W >= 5");
    }
    FeatureTensor f = IdentityExtractor{}.extract(x);
    for (const auto& layer : layers_) f = conv_relu(f, layer);
    return f;
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name) {
    if (name == "identity") return std::make_unique<IdentityExtractor>();
    if (name == "convstack") return std::make_unique<FixedSeedConvStack>();
    throw Error(ErrorCode::Config, "unknown extractor '" + name + "' (identity|convstack)");
}

}  // namespace destripe::losses
