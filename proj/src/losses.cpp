#include "destripe/losses.hpp"

#include "destripe/error.hpp"
#include "destripe/wavelet.hpp"

#include <algorithm>
#include <cmath>

namespace destripe::losses {

void LossWeights::validate() const {
    for (double v : {alpha, lambda1, lambda2, lambda3, lambda4, lambda5, k}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "loss weights must be finite and >= 0");
    }
    if (alpha > 1.0) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0,1]");
    if (!(eps_log > 0.0 && eps_log <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "eps_log must lie in (0, 1e-3]");
}

ImageTensor rescale_gradient(const ImageTensor& g) {
    ImageTensor out = g;
    for (float& v : out.values()) v = (v + 1.0f) * 0.5f;
    return out;
}

std::pair<ImageTensor, ImageTensor> normalize_joint(const ImageTensor& a, const ImageTensor& b) {
    float lo = a.values()[0];
    float hi = lo;
    for (const auto* t : {&a, &b}) {
        for (float v : t->values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    ImageTensor na = a;
    ImageTensor nb = b;
    const double range = double(hi) - double(lo);
    for (auto* t : {&na, &nb}) {
        for (float& v : t->values()) v = range > 0.0 ? static_cast<float>((double(v) - lo) / range) : 0.0f;
    }
    return {std::move(na), std::move(nb)};
}

double loss_cyc_clean(const ImageTensor& clean, const ImageTensor& clean_cycled, const LossWeights& w) {
    w.validate();
    require_same_shape(clean, clean_cycled, "loss_cyc_clean");
    return metrics::mix_distance(clean, clean_cycled, w.alpha);
}

double loss_cyc_stripe(const ImageTensor& stripy, const ImageTensor& stripy_cycled, const LossWeights& w) {
    w.validate();
    require_same_shape(stripy, stripy_cycled, "loss_cyc_stripe");
    if (stripy.height() < 2) throw Error(ErrorCode::InvalidArgument, "loss_cyc_stripe needs H >= 2");
    return metrics::mix_distance(rescale_gradient(grad_v(stripy_cycled)), rescale_gradient(grad_v(stripy)), w.alpha);
}

double loss_hbgm(const ImageTensor& stripy, const ImageTensor& clean_hat, std::size_t levels, const LossWeights& w) {
    w.validate();
    require_same_shape(stripy, clean_hat, "loss_hbgm");
    const wavelet::HbgmConfig cfg{levels};
    auto [hs, hc] = normalize_joint(wavelet::hbgm(stripy, cfg), wavelet::hbgm(clean_hat, cfg));
    return metrics::mix_distance(hs, hc, w.alpha);
}

double loss_perceptual(const ImageTensor& stripy, const ImageTensor& clean_hat, const FeatureExtractor& f) {
    require_same_shape(stripy, clean_hat, "loss_perceptual");
    const FeatureTensor fs = f.extract(stripy);
    const FeatureTensor fc = f.extract(clean_hat);
    if (fs.values.size() != fc.values.size() || fs.values.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "feature tensors differ in size");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < fs.values.size(); ++i) {
        const double d = double(fs.values[i]) - double(fc.values[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(fs.values.size());
}

double loss_identity(const ImageTensor& clean, const ImageTensor& clean_identity, const LossWeights& w) {
    w.validate();
    require_same_shape(clean, clean_identity, "loss_identity");
    return metrics::mix_distance(clean, clean_identity, w.alpha);
}

namespace {

double mean_log(const ImageTensor& scores, bool complement, double eps, const char* what) {
    if (scores.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
    double acc = 0.0;
    for (float s : scores.values()) {
        if (!(s >= 0.0f && s <= 1.0f)) {
            throw Error(ErrorCode::OutOfRange, std::string(what) + " contains a score outside [0,1]");
        }
        double p = std::clamp(static_cast<double>(s), eps, 1.0 - eps);
        acc += std::log(complement ? 1.0 - p : p);
    }
    return acc / static_cast<double>(scores.size());
}

}  // namespace

double loss_adversarial(const ScoreSet& scores, const LossWeights& w) {
    w.validate();
    return mean_log(scores.d_real, false, w.eps_log, "d_real") +
           mean_log(scores.d_fake_hat_s, true, w.eps_log, "d_fake_hat_s") +
           mean_log(scores.d_fake_s, true, w.eps_log, "d_fake_s");
}

double loss_cross(double l_h, double l_perc, const LossWeights& w) { return l_h + w.k * l_perc; }

double loss_total(double l_adv, double l_cyc_s, double l_cyc_c, double l_iden, double l_cross, const LossWeights& w) {
    return w.lambda1 * l_adv + w.lambda2 * l_cyc_s + w.lambda3 * l_cyc_c + w.lambda4 * l_iden + w.lambda5 * l_cross;
}

LossComponents evaluate_losses(const LossInputs& in, const LossWeights& w, std::size_t hbgm_levels,
                               const FeatureExtractor& extractor) {
    LossComponents c;
    c.cyc_c = loss_cyc_clean(in.clean, in.clean_cycled, w);
    c.cyc_s = loss_cyc_stripe(in.stripy, in.stripy_cycled, w);
    c.l_h = loss_hbgm(in.stripy, in.clean_hat, hbgm_levels, w);
    c.l_perc = loss_perceptual(in.stripy, in.clean_hat, extractor);
    c.l_iden = loss_identity(in.clean, in.clean_identity, w);
    c.l_adv = loss_adversarial(in.scores, w);
    c.l_cross = loss_cross(c.l_h, c.l_perc, w);
    c.l_total = loss_total(c.l_adv, c.cyc_s, c.cyc_c, c.l_iden, c.l_cross, w);
    return c;
}

}  // namespace destripe::losses
