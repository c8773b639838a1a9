#include "destripe/error.hpp"
#include "destripe/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace destripe {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::DimensionMismatch: return "dimension mismatch";
        case ErrorCode::Unreadable: return "unreadable file";
        case ErrorCode::UnsupportedFormat: return "unsupported format";
        case ErrorCode::Unwritable: return "unwritable path";
        case ErrorCode::BadMagic: return "bad magic";
        case ErrorCode::BadVersion: return "bad version";
        case ErrorCode::Truncated: return "truncated data";
        case ErrorCode::NonFinite: return "non-finite value";
        case ErrorCode::OutOfRange: return "value out of range";
        case ErrorCode::Config: return "configuration error";
    }
    return "unknown error";
}

ImageTensor::ImageTensor(std::size_t batch, std::size_t height, std::size_t width, float fill)
    : batch_(batch), height_(height), width_(width), values_(batch * height * width, fill) {
    if (batch == 0 || height == 0 || width == 0) {
        throw Error(ErrorCode::InvalidArgument, "image tensor dims must be >= 1");
    }
}

ImageTensor::ImageTensor(std::size_t batch, std::size_t height, std::size_t width,
                         std::vector<float> values)
    : batch_(batch), height_(height), width_(width), values_(std::move(values)) {
    if (batch == 0 || height == 0 || width == 0) {
        throw Error(ErrorCode::InvalidArgument, "image tensor dims must be >= 1");
    }
    if (values_.size() != batch * height * width) {
        throw Error(ErrorCode::DimensionMismatch,
                    "value count " + std::to_string(values_.size()) + " does not match dims");
    }
}

ImageTensor ImageTensor::item(std::size_t b) const {
    if (b >= batch_) throw Error(ErrorCode::OutOfRange, "batch index");
    auto p = plane(b);
    return ImageTensor(1, height_, width_, std::vector<float>(p.begin(), p.end()));
}

void ImageTensor::set_item(std::size_t b, const ImageTensor& single) {
    if (b >= batch_) throw Error(ErrorCode::OutOfRange, "batch index");
    if (single.batch() != 1 || single.height() != height_ || single.width() != width_) {
        throw Error(ErrorCode::DimensionMismatch, "set_item expects a B=1 tensor of matching size");
    }
    std::copy(single.values_.begin(), single.values_.end(), plane(b).begin());
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": (" + std::to_string(a.batch()) + "," +
                        std::to_string(a.height()) + "," + std::to_string(a.width()) + ") vs (" +
                        std::to_string(b.batch()) + "," + std::to_string(b.height()) + "," +
                        std::to_string(b.width()) + ")");
    }
}

void require_finite(const ImageTensor& x, const char* what) {
    for (float v : x.values()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, what);
    }
}

ImageTensor stack(std::span<const ImageTensor> items) {
    if (items.empty()) throw Error(ErrorCode::InvalidArgument, "stack of zero items");
    const auto h = items.front().height();
    const auto w = items.front().width();
    std::size_t total = 0;
    for (const auto& it : items) {
        if (it.height() != h || it.width() != w) {
            throw Error(ErrorCode::DimensionMismatch, "stack: items differ in size");
        }
        total += it.batch();
    }
    std::vector<float> values;
    values.reserve(total * h * w);
    for (const auto& it : items) values.insert(values.end(), it.values().begin(), it.values().end());
    return ImageTensor(total, h, w, std::move(values));
}

ImageTensor clamp01(const ImageTensor& x) {
    ImageTensor out = x;
    for (float& v : out.values()) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

ImageTensor grad_v(const ImageTensor& x) {
    if (x.height() < 2) throw Error(ErrorCode::InvalidArgument, "grad_v needs H >= 2");
    ImageTensor out(x.batch(), x.height() - 1, x.width());
    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t r = 0; r + 1 < x.height(); ++r) {
            for (std::size_t c = 0; c < x.width(); ++c) {
                out(b, r, c) = x(b, r + 1, c) - x(b, r, c);
            }
        }
    }
    return out;
}

}  // namespace destripe
