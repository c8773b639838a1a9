#include "destripe/sgm.hpp"

#include "destripe/error.hpp"
#include "destripe/parallel.hpp"
#include "destripe/rng.hpp"

#include <algorithm>
#include <cmath>

namespace destripe::sgm {

Distribution parse_distribution(const std::string& name) {
    if (name == "gaussian" || name == "normal") return Distribution::Gaussian;
    if (name == "uniform") return Distribution::Uniform;
    throw Error(ErrorCode::Config, "unknown distribution '" + name + "' (gaussian|uniform)");
}

const char* to_string(Distribution d) {
    return d == Distribution::Gaussian ? "gaussian" : "uniform";
}

void SgmConfig::validate() const {
    if (!std::isfinite(intensity_min) || !std::isfinite(intensity_max) || intensity_min < 0.0 ||
        intensity_min > intensity_max) {
        throw Error(ErrorCode::InvalidArgument, "intensity range must satisfy 0 <= min <= max");
    }
    if (order != kPolynomialOrder) throw Error(ErrorCode::InvalidArgument, "SGM order must be 3");
}

ImageTensor StripeField::matrix() const {
    ImageTensor out(1, height, row.size());
    for (std::size_t r = 0; r < height; ++r) std::copy(row.begin(), row.end(), out.plane(0).begin() + r * row.size());
    return out;
}

StripeField sample_stripe_field(const SgmConfig& cfg, int m, std::size_t height, std::size_t width,
                                std::uint64_t batch_index) {
    cfg.validate();
    if (width == 0 || height == 0) throw Error(ErrorCode::InvalidArgument, "stripe field needs H, W >= 1");
    if (m < 0 || m > cfg.order) throw Error(ErrorCode::InvalidArgument, "order index out of range");

    const auto rng = CounterRng::stream(cfg.seed, batch_index, static_cast<std::uint64_t>(m));
    StripeField f;
    f.order = m;
    f.height = height;
    f.intensity = cfg.intensity_min + (cfg.intensity_max - cfg.intensity_min) * rng.uniform(0);
    f.row.resize(width);
    for (std::size_t j = 0; j < width; ++j) {
        double a = 0.0;
        if (cfg.distribution == Distribution::Gaussian) {
            a = f.intensity * rng.normal(j + 1);
        } else {
            a = f.intensity * (2.0 * rng.uniform(j + 1) - 1.0);
        }
        f.row[j] = static_cast<float>(a);
    }
    return f;
}

StripeSet sample_stripe_set(const SgmConfig& cfg, std::size_t height, std::size_t width,
                            std::uint64_t batch_index) {
    StripeSet set;
    for (int m = 0; m <= kPolynomialOrder; ++m) set[m] = sample_stripe_field(cfg, m, height, width, batch_index);
    return set;
}

ImageTensor apply_sgm(const ImageTensor& clean, const StripeSet& fields, bool clamp_output) {
    for (const auto& f : fields) {
        if (f.height != clean.height() || f.width() != clean.width()) {
            throw Error(ErrorCode::DimensionMismatch, "stripe field does not match image size");
        }
    }
    const auto& a0 = fields[0].row;
    const auto& a1 = fields[1].row;
    const auto& a2 = fields[2].row;
    const auto& a3 = fields[3].row;

    ImageTensor out(clean.batch(), clean.height(), clean.width());
    for (std::size_t b = 0; b < clean.batch(); ++b) {
        for (std::size_t r = 0; r < clean.height(); ++r) {
            for (std::size_t c = 0; c < clean.width(); ++c) {
                const double ic = clean(b, r, c);
                const double p3 = double(a3[c]) * a3[c] * a3[c];
                const double p2 = double(a2[c]) * a2[c];
                double v = ic + p3 * ic + p2 * ic + double(a1[c]) * ic + a0[c];
                if (clamp_output) v = std::clamp(v, 0.0, 1.0);
                out(b, r, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

SimulationResult simulate_batch(const ImageTensor& cleans, const SgmConfig& cfg, unsigned threads,
                                std::uint64_t first_index) {
    cfg.validate();
    SimulationResult result{ImageTensor(cleans.batch(), cleans.height(), cleans.width()),
                            std::vector<StripeSet>(cleans.batch())};
    parallel_for(cleans.batch(), threads, [&](std::size_t k) {
        result.fields[k] = sample_stripe_set(cfg, cleans.height(), cleans.width(), first_index + k);
        result.stripy.set_item(k, apply_sgm(cleans.item(k), result.fields[k], cfg.clamp_output));
    });
    return result;
}

}  // namespace destripe::sgm
