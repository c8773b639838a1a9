#pragma once

#include "destripe/image.hpp"

#include <limits>
#include <string>
#include <vector>

namespace destripe::metrics {

/// Gaussian-window SSIM settings on unit dynamic range.
struct SsimParams {
    std::size_t window = 11;
    double sigma = 1.5;
    double c1 = 0.01 * 0.01;
    double c2 = 0.03 * 0.03;
    std::size_t scales = 5;  ///< M for MS-SSIM

    void validate() const;
};

/// Normalized 1-D Gaussian taps centred at (side-1)/2; the 2-D window is the
/// outer product with itself and also sums to 1.
std::vector<double> gaussian_taps(std::size_t side, double sigma);

/// Window side used on an image of the given size: min(window, H, W).
std::size_t adapted_window(const SsimParams& p, std::size_t height, std::size_t width);

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over all elements (MAX = 1); +inf when MSE = 0.
double psnr(const ImageTensor& x, const ImageTensor& y);

/// Mean over the batch of the per-image mean of l(x,y) * cs(x,y).
double ssim(const ImageTensor& x, const ImageTensor& y, const SsimParams& p = {});

/// Mean over the batch of prod_{j<M} mean(cs_j) * mean(l_M * cs_M), with 2x2
/// average pooling between scales. M = 1 reduces to ssim().
double ms_ssim(const ImageTensor& x, const ImageTensor& y, const SsimParams& p = {});

/// Mean over the batch of alpha (1 - MS-SSIM) + (1 - alpha) mean(G * |x - y|),
/// where G is the full-resolution Gaussian window (valid filtering).
double mix_distance(const ImageTensor& x, const ImageTensor& y, double alpha, const SsimParams& p = {});

/// 2x2 average pooling, odd trailing row/column dropped.
ImageTensor avg_pool2(const ImageTensor& x);

struct MetricsRow {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
    double ms_ssim = 0.0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;

    MetricsRow mean() const;
    /// Header `name,psnr,ssim,ms_ssim`, per-image rows, then a `mean` row.
    std::string to_csv() const;
};

/// "inf" for +infinity, otherwise fixed with 6 decimals.
std::string format_value(double v);

MetricsRow evaluate_pair(const std::string& name, const ImageTensor& ref, const ImageTensor& test,
                         const SsimParams& p = {});

}  // namespace destripe::metrics
