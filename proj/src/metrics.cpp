#include "destripe/metrics.hpp"

#include "destripe/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace destripe::metrics {

namespace {

/// Row-major double plane.
struct Plane {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

Plane to_plane(const ImageTensor& x, std::size_t b) {
    auto p = x.plane(b);
    return Plane{x.height(), x.width(), std::vector<double>(p.begin(), p.end())};
}

/// Separable valid-mode filtering with a square window of taps.size().
Plane filter_valid(const Plane& in, const std::vector<double>& taps) {
    const std::size_t n = taps.size();
    Plane tmp{in.rows, in.cols - n + 1, {}};
    tmp.v.assign(tmp.rows * tmp.cols, 0.0);
    for (std::size_t r = 0; r < tmp.rows; ++r) {
        for (std::size_t c = 0; c < tmp.cols; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += taps[k] * in.at(r, c + k);
            tmp.at(r, c) = acc;
        }
    }
    Plane out{in.rows - n + 1, tmp.cols, {}};
    out.v.assign(out.rows * out.cols, 0.0);
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += taps[k] * tmp.at(r + k, c);
            out.at(r, c) = acc;
        }
    }
    return out;
}

Plane multiply(const Plane& a, const Plane& b) {
    Plane out{a.rows, a.cols, std::vector<double>(a.v.size())};
    for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
    return out;
}

Plane pool(const Plane& in) {
    Plane out{in.rows / 2, in.cols / 2, {}};
    out.v.resize(out.rows * out.cols);
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) {
            out.at(r, c) = 0.25 * ((in.at(2 * r, 2 * c) + in.at(2 * r, 2 * c + 1)) +
                                   (in.at(2 * r + 1, 2 * c) + in.at(2 * r + 1, 2 * c + 1)));
        }
    }
    return out;
}

struct ScaleStats {
    double mean_lcs = 0.0;  // mean of l * cs
    double mean_cs = 0.0;
};

ScaleStats scale_stats(const Plane& x, const Plane& y, const SsimParams& p) {
    const auto taps = gaussian_taps(adapted_window(p, x.rows, x.cols), p.sigma);
    const Plane mx = filter_valid(x, taps);
    const Plane my = filter_valid(y, taps);
    const Plane exx = filter_valid(multiply(x, x), taps);
    const Plane eyy = filter_valid(multiply(y, y), taps);
    const Plane exy = filter_valid(multiply(x, y), taps);

    double sum_lcs = 0.0;
    double sum_cs = 0.0;
    for (std::size_t i = 0; i < mx.v.size(); ++i) {
        const double ux = mx.v[i];
        const double uy = my.v[i];
        const double vx = exx.v[i] - ux * ux;
        const double vy = eyy.v[i] - uy * uy;
        const double cxy = exy.v[i] - ux * uy;
        const double l = (2.0 * ux * uy + p.c1) / (ux * ux + uy * uy + p.c1);
        const double cs = (2.0 * cxy + p.c2) / (vx + vy + p.c2);
        sum_lcs += l * cs;
        sum_cs += cs;
    }
    const double n = static_cast<double>(mx.v.size());
    return {sum_lcs / n, sum_cs / n};
}

double ms_ssim_plane(Plane x, Plane y, const SsimParams& p) {
    double product = 1.0;
    for (std::size_t s = 0; s < p.scales; ++s) {
        const ScaleStats st = scale_stats(x, y, p);
        if (s + 1 == p.scales) {
            product *= st.mean_lcs;
        } else {
            product *= st.mean_cs;
            x = pool(x);
            y = pool(y);
        }
    }
    return product;
}

void require_scales(const ImageTensor& x, const SsimParams& p) {
    p.validate();
    const std::size_t shift = p.scales - 1;
    if (shift >= 63 || (x.height() >> shift) < 1 || (x.width() >> shift) < 1) {
        throw Error(ErrorCode::InvalidArgument, std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                                                    " is too small for " + std::to_string(p.scales) + " scales");
    }
}

}  // namespace

void SsimParams::validate() const {
    if (window < 1) throw Error(ErrorCode::InvalidArgument, "SSIM window must be >= 1");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "SSIM sigma must be > 0");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "SSIM constants must be > 0");
    if (scales < 1) throw Error(ErrorCode::InvalidArgument, "MS-SSIM needs M >= 1");
}

std::vector<double> gaussian_taps(std::size_t side, double sigma) {
    std::vector<double> taps(side);
    const double centre = (static_cast<double>(side) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < side; ++i) {
        const double d = static_cast<double>(i) - centre;
        taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += taps[i];
    }
    for (double& t : taps) t /= total;
    return taps;
}

std::size_t adapted_window(const SsimParams& p, std::size_t height, std::size_t width) {
    return std::min({p.window, height, width});
}

double psnr(const ImageTensor& x, const ImageTensor& y) {
    require_same_shape(x, y, "psnr");
    double acc = 0.0;
    auto xv = x.values();
    auto yv = y.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double d = double(xv[i]) - double(yv[i]);
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(xv.size());
    if (mse == 0.0) return kPsnrInfinity;
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageTensor& x, const ImageTensor& y, const SsimParams& p) {
    SsimParams single = p;
    single.scales = 1;
    return ms_ssim(x, y, single);
}

double ms_ssim(const ImageTensor& x, const ImageTensor& y, const SsimParams& p) {
    require_same_shape(x, y, "ms_ssim");
    require_scales(x, p);
    double acc = 0.0;
    for (std::size_t b = 0; b < x.batch(); ++b) acc += ms_ssim_plane(to_plane(x, b), to_plane(y, b), p);
    return acc / static_cast<double>(x.batch());
}

double mix_distance(const ImageTensor& x, const ImageTensor& y, double alpha, const SsimParams& p) {
    require_same_shape(x, y, "mix_distance");
    require_scales(x, p);
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0,1]");
    const auto taps = gaussian_taps(adapted_window(p, x.height(), x.width()), p.sigma);
    double acc = 0.0;
    for (std::size_t b = 0; b < x.batch(); ++b) {
        Plane px = to_plane(x, b);
        Plane py = to_plane(y, b);
        Plane l1{px.rows, px.cols, std::vector<double>(px.v.size())};
        for (std::size_t i = 0; i < l1.v.size(); ++i) l1.v[i] = std::abs(px.v[i] - py.v[i]);
        const Plane smoothed = filter_valid(l1, taps);
        double l1_mean = 0.0;
        for (double v : smoothed.v) l1_mean += v;
        l1_mean /= static_cast<double>(smoothed.v.size());

        double ms = 1.0;
        if (alpha > 0.0) ms = ms_ssim_plane(std::move(px), std::move(py), p);
        acc += alpha * (1.0 - ms) + (1.0 - alpha) * l1_mean;
    }
    return acc / static_cast<double>(x.batch());
}

ImageTensor avg_pool2(const ImageTensor& x) {
    if (x.height() < 2 || x.width() < 2) throw Error(ErrorCode::InvalidArgument, "avg_pool2 needs H, W >= 2");
    ImageTensor out(x.batch(), x.height() / 2, x.width() / 2);
    for (std::size_t b = 0; b < x.batch(); ++b) {
        const Plane pooled = pool(to_plane(x, b));
        auto dst = out.plane(b);
        for (std::size_t i = 0; i < pooled.v.size(); ++i) dst[i] = static_cast<float>(pooled.v[i]);
    }
    return out;
}

std::string format_value(double v) {
    if (std::isinf(v) && v > 0) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

MetricsRow MetricsReport::mean() const {
    MetricsRow m{"mean", 0.0, 0.0, 0.0};
    if (rows.empty()) return m;
    for (const auto& r : rows) {
        m.psnr += r.psnr;
        m.ssim += r.ssim;
        m.ms_ssim += r.ms_ssim;
    }
    const double n = static_cast<double>(rows.size());
    m.psnr /= n;
    m.ssim /= n;
    m.ms_ssim /= n;
    return m;
}

std::string MetricsReport::to_csv() const {
    std::string out = "name,psnr,ssim,ms_ssim\n";
    auto emit = [&](const MetricsRow& r) {
        out += r.name + "," + format_value(r.psnr) + "," + format_value(r.ssim) + "," + format_value(r.ms_ssim) + "\n";
    };
    for (const auto& r : rows) emit(r);
    if (!rows.empty()) emit(mean());
    return out;
}

MetricsRow evaluate_pair(const std::string& name, const ImageTensor& ref, const ImageTensor& test,
                         const SsimParams& p) {
    // Keep MS-SSIM defined on small images by dropping scales that would vanish.
    SsimParams ms = p;
    while (ms.scales > 1 && ((ref.height() >> (ms.scales - 1)) < 1 || (ref.width() >> (ms.scales - 1)) < 1)) {
        --ms.scales;
    }
    return {name, psnr(ref, test), ssim(ref, test, p), ms_ssim(ref, test, ms)};
}

}  // namespace destripe::metrics
