#include "destripe/error.hpp"
#include "destripe/harness.hpp"
#include "destripe/wavelet.hpp"

#include <algorithm>
#include <iostream>

namespace destripe::harness {

ImageTensor center_crop_divisible(const ImageTensor& x, std::size_t levels, std::size_t* top, std::size_t* left) {
    const std::size_t unit = std::size_t{1} << levels;
    const std::size_t h = x.height() - x.height() % unit;
    const std::size_t w = x.width() - x.width() % unit;
    if (h == 0 || w == 0) {
        throw Error(ErrorCode::InvalidArgument, "image smaller than 2^" + std::to_string(levels) + " pixels");
    }
    const std::size_t r0 = (x.height() - h) / 2;
    const std::size_t c0 = (x.width() - w) / 2;
    if (top) *top = r0;
    if (left) *left = c0;
    ImageTensor out(x.batch(), h, w);
    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) out(b, r, c) = x(b, r0 + r, c0 + c);
        }
    }
    return out;
}

ImageTensor display_map(const ImageTensor& x) {
    const auto [lo_it, hi_it] = std::minmax_element(x.values().begin(), x.values().end());
    const double lo = *lo_it;
    const double range = double(*hi_it) - lo;
    ImageTensor out = x;
    for (float& v : out.values()) v = range > 0.0 ? static_cast<float>((v - lo) / range) : 0.5f;
    return out;
}

HbgmResult cmd_hbgm_filter(const fs::path& input, const fs::path& output, const HbgmOptions& opts) {
    if (opts.levels < 1 || opts.levels > 16) throw Error(ErrorCode::InvalidArgument, "levels must be in [1,16]");
    // .dstv inputs skip quantization; only single images are accepted
    const ImageTensor img = input.extension() == ".dstv" ? load_tensor(input) : load_image(input);
    if (img.batch() != 1) throw Error(ErrorCode::DimensionMismatch, input.string() + ": expected a single image");

    HbgmResult result;
    const ImageTensor cropped = center_crop_divisible(img, opts.levels, &result.crop_top, &result.crop_left);
    result.height = cropped.height();
    result.width = cropped.width();
    result.cropped = !cropped.same_shape(img);
    if (result.cropped) {
        std::cerr << "warning: " << input.string() << " cropped from " << img.height() << "x" << img.width() << " to "
                  << result.height << "x" << result.width << " at (" << result.crop_top << "," << result.crop_left
                  << ") to fit " << opts.levels << " Haar levels\n";
    }

    const wavelet::WaveletPyramid pyramid = wavelet::haar_decompose(cropped, opts.levels);
    result.filtered = wavelet::hbgm(cropped, {opts.levels});
    save_image(display_map(result.filtered), output, 8);

    if (opts.raw_output) save_tensor(result.filtered, *opts.raw_output);
    if (opts.subband_dir) {
        std::error_code ec;
        fs::create_directories(*opts.subband_dir, ec);
        if (!fs::is_directory(*opts.subband_dir)) throw Error(ErrorCode::Unwritable, opts.subband_dir->string());
        const auto names = wavelet::subband_names(opts.levels);
        const auto bands = wavelet::subbands_in_order(pyramid);
        for (std::size_t i = 0; i < names.size(); ++i) {
            const fs::path path = *opts.subband_dir / (names[i] + ".dstv");
            save_tensor(*bands[i], path);
            result.subband_files.push_back(path);
        }
    }
    return result;
}

}  // namespace destripe::harness
