#include "destripe/error.hpp"
#include "destripe/image.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace destripe {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'T', 'V'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t TensorFile::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::vector<std::uint8_t> encode_tensor(const TensorFile& t) {
    if (t.dims.empty() || t.dims.size() > 255) {
        throw Error(ErrorCode::InvalidArgument, "tensor rank must be in [1,255]");
    }
    if (t.element_count() != t.values.size()) {
        throw Error(ErrorCode::DimensionMismatch, "payload length does not match dims");
    }
    std::vector<std::uint8_t> out;
    out.reserve(6 + 4 * t.dims.size() + 4 * t.values.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(kTensorFileVersion);
    out.push_back(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

TensorFile decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 6) throw Error(ErrorCode::Truncated, "tensor header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "expected DSTV");
    if (bytes[4] != kTensorFileVersion) {
        throw Error(ErrorCode::BadVersion, "DSTV version " + std::to_string(bytes[4]));
    }
    const std::size_t rank = bytes[5];
    if (rank == 0) throw Error(ErrorCode::InvalidArgument, "DSTV rank 0");
    if (bytes.size() < 6 + 4 * rank) throw Error(ErrorCode::Truncated, "tensor dims");

    TensorFile t;
    t.dims.reserve(rank);
    for (std::size_t i = 0; i < rank; ++i) t.dims.push_back(get_u32(bytes.data() + 6 + 4 * i));
    const std::size_t n = t.element_count();
    const std::size_t offset = 6 + 4 * rank;
    if (bytes.size() - offset != 4 * n) {
        throw Error(bytes.size() - offset < 4 * n ? ErrorCode::Truncated : ErrorCode::DimensionMismatch,
                    "payload is " + std::to_string(bytes.size() - offset) + " bytes, expected " +
                        std::to_string(4 * n));
    }
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.values[i] = std::bit_cast<float>(get_u32(bytes.data() + offset + 4 * i));
    }
    return t;
}

void write_tensor_file(const TensorFile& t, const std::filesystem::path& path) {
    const auto bytes = encode_tensor(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Unwritable, path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Unwritable, path.string());
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Unreadable, path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

void save_tensor(const ImageTensor& x, const std::filesystem::path& path) {
    TensorFile t;
    t.dims = {static_cast<std::uint32_t>(x.batch()), static_cast<std::uint32_t>(x.height()),
              static_cast<std::uint32_t>(x.width())};
    t.values.assign(x.values().begin(), x.values().end());
    write_tensor_file(t, path);
}

ImageTensor load_tensor(const std::filesystem::path& path) {
    TensorFile t = read_tensor_file(path);
    std::size_t b = 1, h = 1, w = 1;
    switch (t.dims.size()) {
        case 1: w = t.dims[0]; break;
        case 2: h = t.dims[0]; w = t.dims[1]; break;
        case 3: b = t.dims[0]; h = t.dims[1]; w = t.dims[2]; break;
        default:
            throw Error(ErrorCode::UnsupportedFormat,
                        path.string() + ": rank " + std::to_string(t.dims.size()) + " is not an image");
    }
    ImageTensor x(b, h, w, std::move(t.values));
    require_finite(x, path.string().c_str());
    return x;
}

}  // namespace destripe
