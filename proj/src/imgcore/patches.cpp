#include "destripe/error.hpp"
#include "destripe/image.hpp"

namespace destripe {

void PatchSpec::validate() const {
    if (size < 8) throw Error(ErrorCode::InvalidArgument, "patch size must be >= 8");
    if (stride < 1) throw Error(ErrorCode::InvalidArgument, "patch stride must be >= 1");
    if (scale2x && size % 2 != 0) throw Error(ErrorCode::InvalidArgument, "scale2x needs an even patch size");
}

std::size_t patch_count(const ImageTensor& x, const PatchSpec& spec) {
    spec.validate();
    if (x.height() < spec.size || x.width() < spec.size) {
        throw Error(ErrorCode::InvalidArgument, "image smaller than patch size");
    }
    const std::size_t rows = (x.height() - spec.size) / spec.stride + 1;
    const std::size_t cols = (x.width() - spec.size) / spec.stride + 1;
    return x.batch() * rows * cols * (1 + spec.augment_count());
}

ImageTensor rotate90(const ImageTensor& x) {
    // Counter-clockwise: out[r][c] = in[c][W-1-r].
    ImageTensor out(x.batch(), x.width(), x.height());
    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t r = 0; r < x.width(); ++r) {
            for (std::size_t c = 0; c < x.height(); ++c) out(b, r, c) = x(b, c, x.width() - 1 - r);
        }
    }
    return out;
}

namespace {

ImageTensor zoom_center_2x(const ImageTensor& patch) {
    const std::size_t n = patch.height();
    const std::size_t off = n / 4;
    ImageTensor out(1, n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) out(0, r, c) = patch(0, off + r / 2, off + c / 2);
    }
    return out;
}

}  // namespace

ImageTensor extract_patches(const ImageTensor& x, const PatchSpec& spec) {
    const std::size_t count = patch_count(x, spec);
    const std::size_t n = spec.size;
    std::vector<float> values;
    values.reserve(count * n * n);
    auto append = [&](const ImageTensor& p) { values.insert(values.end(), p.values().begin(), p.values().end()); };

    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t r0 = 0; r0 + n <= x.height(); r0 += spec.stride) {
            for (std::size_t c0 = 0; c0 + n <= x.width(); c0 += spec.stride) {
                ImageTensor patch(1, n, n);
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t c = 0; c < n; ++c) patch(0, r, c) = x(b, r0 + r, c0 + c);
                }
                append(patch);
                if (spec.rotate90) append(rotate90(patch));
                if (spec.scale2x) append(zoom_center_2x(patch));
            }
        }
    }
    return ImageTensor(count, n, n, std::move(values));
}

}  // namespace destripe
