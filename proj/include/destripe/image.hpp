#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace destripe {

/// Batch of single-channel float images, row-major (batch, row, column).
/// Nominal range is [0,1]; stored values are always finite.
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(std::size_t batch, std::size_t height, std::size_t width, float fill = 0.0f);
    ImageTensor(std::size_t batch, std::size_t height, std::size_t width, std::vector<float> values);

    std::size_t batch() const noexcept { return batch_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return height_ * width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    float& operator()(std::size_t b, std::size_t r, std::size_t c) {
        return values_[(b * height_ + r) * width_ + c];
    }
    float operator()(std::size_t b, std::size_t r, std::size_t c) const {
        return values_[(b * height_ + r) * width_ + c];
    }

    std::span<float> values() noexcept { return values_; }
    std::span<const float> values() const noexcept { return values_; }
    std::span<float> plane(std::size_t b) { return {values_.data() + b * plane_size(), plane_size()}; }
    std::span<const float> plane(std::size_t b) const {
        return {values_.data() + b * plane_size(), plane_size()};
    }

    /// Copy of one batch item as a B=1 tensor.
    ImageTensor item(std::size_t b) const;
    void set_item(std::size_t b, const ImageTensor& single);

    bool same_shape(const ImageTensor& other) const noexcept {
        return batch_ == other.batch_ && height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    std::size_t batch_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<float> values_;
};

/// Throws DimensionMismatch when shapes differ; `what` names the operation.
void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

/// Throws NonFinite if any element is NaN or infinite.
void require_finite(const ImageTensor& x, const char* what);

/// Stacks B=1..n tensors of equal (H,W) into one batch.
ImageTensor stack(std::span<const ImageTensor> items);

ImageTensor clamp01(const ImageTensor& x);

/// Vertical forward difference: out[b,i,j] = x[b,i+1,j] - x[b,i,j]; output has H-1 rows.
ImageTensor grad_v(const ImageTensor& x);

// ---------------------------------------------------------------------------
// Image files

/// Loads an 8/16-bit PGM (P2/P5) or PNG. RGB(A) is reduced to the channel mean,
/// alpha is dropped. Values are scaled by 1/(2^bitdepth - 1).
ImageTensor load_image(const std::filesystem::path& path);

/// Writes item 0 of a B=1 tensor as PNG or PGM (chosen by extension), clamping
/// to [0,1] and rounding v*(2^bitdepth-1).
void save_image(const ImageTensor& x, const std::filesystem::path& path, int bitdepth = 8);

bool is_image_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// DSTV tensor files
//
// Layout: "DSTV" | u8 version (=1) | u8 rank | rank x u32 LE dims | f32 LE payload.

inline constexpr std::uint8_t kTensorFileVersion = 1;

struct TensorFile {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::size_t element_count() const;
};

std::vector<std::uint8_t> encode_tensor(const TensorFile& t);
TensorFile decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor_file(const TensorFile& t, const std::filesystem::path& path);
TensorFile read_tensor_file(const std::filesystem::path& path);

/// ImageTensor is written as rank 3 (B,H,W).
void save_tensor(const ImageTensor& x, const std::filesystem::path& path);
/// Accepts rank 1 (1,1,W), rank 2 (1,H,W) and rank 3 files.
ImageTensor load_tensor(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Patches

struct PatchSpec {
    std::size_t size = 64;
    std::size_t stride = 64;
    bool rotate90 = false;  ///< also emit each patch rotated 90 degrees counter-clockwise
    bool scale2x = false;   ///< also emit each patch's central half zoomed 2x (pixel replication)

    std::size_t augment_count() const noexcept { return (rotate90 ? 1 : 0) + (scale2x ? 1 : 0); }
    void validate() const;
};

std::size_t patch_count(const ImageTensor& x, const PatchSpec& spec);

/// Raster-order tiling of every batch item. For each tile the plain patch is
/// emitted first, followed by its augmented copies (rotate90, then scale2x).
ImageTensor extract_patches(const ImageTensor& x, const PatchSpec& spec);

ImageTensor rotate90(const ImageTensor& x);

}  // namespace destripe
