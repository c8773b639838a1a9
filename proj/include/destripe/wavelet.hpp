#pragma once

#include "destripe/image.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace destripe::wavelet {

/// Detail subbands of one decomposition level, each (B, H/2^l, W/2^l).
///   horizontal: high-pass vertically, low-pass horizontally (responds to horizontal edges)
///   vertical:   high-pass horizontally, low-pass vertically (responds to vertical stripes)
///   diagonal:   high-pass in both directions
struct DetailLevel {
    ImageTensor horizontal;
    ImageTensor vertical;
    ImageTensor diagonal;
};

/// Orthonormal multi-level 2-D Haar pyramid. details[0] is level 1 (finest).
struct WaveletPyramid {
    std::vector<DetailLevel> details;
    ImageTensor approximation;

    std::size_t levels() const noexcept { return details.size(); }
    /// Sum of squares over every subband, accumulated in double.
    double energy() const;
};

/// Largest L such that both dims are divisible by 2^L.
std::size_t max_levels(std::size_t height, std::size_t width);

/// On each 2x2 block [[a,b],[c,d]]:
///   A = (a+b+c+d)/2, V = (a-b+c-d)/2, H = (a+b-c-d)/2, D = (a-b-c+d)/2,
/// recursing on A. Dimensions must be divisible by 2^levels.
WaveletPyramid haar_decompose(const ImageTensor& x, std::size_t levels);

ImageTensor haar_reconstruct(const WaveletPyramid& p);

struct HbgmConfig {
    std::size_t levels = 3;
};

/// Haar background guidance: decompose, zero the approximation and every
/// vertical-detail subband, reconstruct. Column-constant content is removed
/// exactly.
ImageTensor hbgm(const ImageTensor& x, const HbgmConfig& cfg = {});

/// Subband names in export order: A_L, H1..HL, V1..VL, D1..DL.
std::vector<std::string> subband_names(std::size_t levels);
std::vector<const ImageTensor*> subbands_in_order(const WaveletPyramid& p);

/// Builds a pyramid from subbands given in subband_names() order.
WaveletPyramid pyramid_from_subbands(std::vector<ImageTensor> subbands, std::size_t levels);

}  // namespace destripe::wavelet
