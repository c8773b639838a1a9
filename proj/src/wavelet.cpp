#include "destripe/wavelet.hpp"

#include "destripe/error.hpp"

namespace destripe::wavelet {

namespace {

struct Split {
    ImageTensor a, h, v, d;
};

Split analyze(const ImageTensor& x) {
    const std::size_t rows = x.height() / 2;
    const std::size_t cols = x.width() / 2;
    Split s{ImageTensor(x.batch(), rows, cols), ImageTensor(x.batch(), rows, cols),
            ImageTensor(x.batch(), rows, cols), ImageTensor(x.batch(), rows, cols)};
    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const double a = x(b, 2 * r, 2 * c);
                const double bb = x(b, 2 * r, 2 * c + 1);
                const double cc = x(b, 2 * r + 1, 2 * c);
                const double d = x(b, 2 * r + 1, 2 * c + 1);
                s.a(b, r, c) = static_cast<float>(((a + bb) + (cc + d)) * 0.5);
                s.v(b, r, c) = static_cast<float>(((a - bb) + (cc - d)) * 0.5);
                s.h(b, r, c) = static_cast<float>(((a + bb) - (cc + d)) * 0.5);
                s.d(b, r, c) = static_cast<float>(((a - bb) - (cc - d)) * 0.5);
            }
        }
    }
    return s;
}

ImageTensor synthesize(const ImageTensor& a, const DetailLevel& lvl) {
    ImageTensor x(a.batch(), a.height() * 2, a.width() * 2);
    for (std::size_t b = 0; b < a.batch(); ++b) {
        for (std::size_t r = 0; r < a.height(); ++r) {
            for (std::size_t c = 0; c < a.width(); ++c) {
                const double av = a(b, r, c);
                const double h = lvl.horizontal(b, r, c);
                const double v = lvl.vertical(b, r, c);
                const double d = lvl.diagonal(b, r, c);
                x(b, 2 * r, 2 * c) = static_cast<float>(((av + v) + (h + d)) * 0.5);
                x(b, 2 * r, 2 * c + 1) = static_cast<float>(((av - v) + (h - d)) * 0.5);
                x(b, 2 * r + 1, 2 * c) = static_cast<float>(((av + v) - (h + d)) * 0.5);
                x(b, 2 * r + 1, 2 * c + 1) = static_cast<float>(((av - v) - (h - d)) * 0.5);
            }
        }
    }
    return x;
}

double sum_squares(const ImageTensor& t) {
    double acc = 0.0;
    for (float v : t.values()) acc += double(v) * v;
    return acc;
}

}  // namespace

double WaveletPyramid::energy() const {
    double e = sum_squares(approximation);
    for (const auto& lvl : details) {
        e += sum_squares(lvl.horizontal) + sum_squares(lvl.vertical) + sum_squares(lvl.diagonal);
    }
    return e;
}

std::size_t max_levels(std::size_t height, std::size_t width) {
    std::size_t l = 0;
    while (height % 2 == 0 && width % 2 == 0 && height > 1 && width > 1) {
        height /= 2;
        width /= 2;
        ++l;
    }
    return l;
}

WaveletPyramid haar_decompose(const ImageTensor& x, std::size_t levels) {
    if (levels < 1) throw Error(ErrorCode::InvalidArgument, "haar_decompose needs levels >= 1");
    if (x.empty()) throw Error(ErrorCode::InvalidArgument, "haar_decompose of empty tensor");
    const std::size_t unit = std::size_t{1} << levels;
    if (levels > 30 || x.height() % unit != 0 || x.width() % unit != 0) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(x.height()) + "x" + std::to_string(x.width()) + " is not divisible by 2^" +
                        std::to_string(levels));
    }
    WaveletPyramid p;
    p.details.reserve(levels);
    ImageTensor current = x;
    for (std::size_t l = 0; l < levels; ++l) {
        Split s = analyze(current);
        p.details.push_back({std::move(s.h), std::move(s.v), std::move(s.d)});
        current = std::move(s.a);
    }
    p.approximation = std::move(current);
    return p;
}

ImageTensor haar_reconstruct(const WaveletPyramid& p) {
    if (p.details.empty()) throw Error(ErrorCode::InvalidArgument, "pyramid without levels");
    ImageTensor current = p.approximation;
    for (std::size_t l = p.details.size(); l-- > 0;) {
        const auto& lvl = p.details[l];
        if (!lvl.horizontal.same_shape(current) || !lvl.vertical.same_shape(current) ||
            !lvl.diagonal.same_shape(current)) {
            throw Error(ErrorCode::DimensionMismatch, "inconsistent subband dims at level " + std::to_string(l + 1));
        }
        current = synthesize(current, lvl);
    }
    return current;
}

ImageTensor hbgm(const ImageTensor& x, const HbgmConfig& cfg) {
    WaveletPyramid p = haar_decompose(x, cfg.levels);
    for (float& v : p.approximation.values()) v = 0.0f;
    for (auto& lvl : p.details) {
        for (float& v : lvl.vertical.values()) v = 0.0f;
    }
    return haar_reconstruct(p);
}

std::vector<std::string> subband_names(std::size_t levels) {
    std::vector<std::string> names{"A_" + std::to_string(levels)};
    for (const char* kind : {"H", "V", "D"}) {
        for (std::size_t l = 1; l <= levels; ++l) names.push_back(kind + std::to_string(l));
    }
    return names;
}

std::vector<const ImageTensor*> subbands_in_order(const WaveletPyramid& p) {
    std::vector<const ImageTensor*> out{&p.approximation};
    for (const auto& lvl : p.details) out.push_back(&lvl.horizontal);
    for (const auto& lvl : p.details) out.push_back(&lvl.vertical);
    for (const auto& lvl : p.details) out.push_back(&lvl.diagonal);
    return out;
}

WaveletPyramid pyramid_from_subbands(std::vector<ImageTensor> subbands, std::size_t levels) {
    if (levels < 1 || subbands.size() != 3 * levels + 1) {
        throw Error(ErrorCode::InvalidArgument, "expected 3L+1 subbands");
    }
    WaveletPyramid p;
    p.approximation = std::move(subbands[0]);
    p.details.resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        p.details[l].horizontal = std::move(subbands[1 + l]);
        p.details[l].vertical = std::move(subbands[1 + levels + l]);
        p.details[l].diagonal = std::move(subbands[1 + 2 * levels + l]);
    }
    return p;
}

}  // namespace destripe::wavelet
