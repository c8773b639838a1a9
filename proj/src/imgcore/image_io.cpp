#include "destripe/error.hpp"
#include "destripe/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

namespace destripe {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---------------------------------------------------------------------------
// PGM

class PnmReader {
public:
    explicit PnmReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long read_uint(const std::string& what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::Truncated, "PGM " + what);
        }
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1u << 30) throw Error(ErrorCode::UnsupportedFormat, "PGM " + what + " too large");
            ++pos_;
        }
        return v;
    }

    std::vector<std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

ImageTensor load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Unreadable, path.string());
    PnmReader rd(std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
    if (rd.bytes_.size() < 2 || rd.bytes_[0] != 'P' || (rd.bytes_[1] != '5' && rd.bytes_[1] != '2')) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a P2/P5 PGM");
    }
    const bool binary = rd.bytes_[1] == '5';
    rd.pos_ = 2;
    const auto w = rd.read_uint("width");
    const auto h = rd.read_uint("height");
    const auto maxval = rd.read_uint("maxval");
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": invalid PGM header");
    }
    const double scale = 1.0 / static_cast<double>(maxval);
    ImageTensor x(1, h, w);
    auto out = x.values();
    if (binary) {
        ++rd.pos_;  // single whitespace after maxval
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        if (rd.bytes_.size() < rd.pos_ + out.size() * bpp) throw Error(ErrorCode::Truncated, path.string());
        const std::uint8_t* p = rd.bytes_.data() + rd.pos_;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const unsigned v = bpp == 2 ? (unsigned(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
            out[i] = static_cast<float>(std::min<double>(v, maxval) * scale);
        }
    } else {
        for (auto& o : out) {
            o = static_cast<float>(std::min<double>(rd.read_uint("pixel"), maxval) * scale);
        }
    }
    return x;
}

void save_pgm(const ImageTensor& x, const std::filesystem::path& path, int bitdepth) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Unwritable, path.string());
    const unsigned maxval = bitdepth == 16 ? 65535u : 255u;
    const std::string header =
        "P5\n" + std::to_string(x.width()) + " " + std::to_string(x.height()) + "\n" + std::to_string(maxval) + "\n";
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<char> payload;
    payload.reserve(x.plane_size() * (bitdepth == 16 ? 2 : 1));
    for (float v : x.plane(0)) {
        const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0f, 1.0f) * static_cast<double>(maxval)));
        if (bitdepth == 16) payload.push_back(static_cast<char>(q >> 8));
        payload.push_back(static_cast<char>(q & 0xff));
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error(ErrorCode::Unwritable, path.string());
}

// ---------------------------------------------------------------------------
// PNG

struct PngRead {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int channels = 0;
    std::vector<png_byte> pixels;  // rows packed, big-endian for 16-bit
};

// Keeps C++ objects with non-trivial destructors out of the setjmp frame.
bool read_png_raw(std::FILE* fp, PngRead& out, char* err, std::size_t err_len) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        std::snprintf(err, err_len, "libpng decode failure");
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_png(png, info, PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_PACKING, nullptr);
    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.channels = png_get_channels(png, info);
    png_bytepp rows = png_get_rows(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    out.pixels.resize(row_bytes * out.height);
    for (png_uint_32 r = 0; r < out.height; ++r) {
        std::copy(rows[r], rows[r] + row_bytes, out.pixels.begin() + static_cast<std::ptrdiff_t>(r * row_bytes));
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

ImageTensor load_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw Error(ErrorCode::Unreadable, path.string());
    png_byte sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a PNG");
    }
    std::rewind(fp.get());
    PngRead raw;
    char err[128] = "allocation failure";
    if (!read_png_raw(fp.get(), raw, err, sizeof err)) {
        throw Error(ErrorCode::Unreadable, path.string() + ": " + err);
    }
    if (raw.bit_depth != 8 && raw.bit_depth != 16) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": bit depth " + std::to_string(raw.bit_depth));
    }
    const std::size_t bps = raw.bit_depth == 16 ? 2 : 1;
    const double scale = 1.0 / (raw.bit_depth == 16 ? 65535.0 : 255.0);
    // Gray, gray+alpha, RGB, RGBA: colour channels averaged, alpha ignored.
    const int colour = raw.channels >= 3 ? 3 : 1;
    ImageTensor x(1, raw.height, raw.width);
    auto out = x.values();
    const png_byte* p = raw.pixels.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (int c = 0; c < colour; ++c) {
            const png_byte* s = p + (i * raw.channels + c) * bps;
            acc += bps == 2 ? (unsigned(s[0]) << 8 | s[1]) : s[0];
        }
        out[i] = static_cast<float>(acc / colour * scale);
    }
    return x;
}

bool write_png_raw(std::FILE* fp, png_uint_32 w, png_uint_32 h, int bitdepth, png_bytepp rows) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, bitdepth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, rows);
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void save_png(const ImageTensor& x, const std::filesystem::path& path, int bitdepth) {
    const std::size_t bps = bitdepth == 16 ? 2 : 1;
    const double maxval = bitdepth == 16 ? 65535.0 : 255.0;
    std::vector<png_byte> pixels(x.plane_size() * bps);
    auto in = x.plane(0);
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto q = static_cast<unsigned>(std::lround(std::clamp(in[i], 0.0f, 1.0f) * maxval));
        if (bps == 2) {
            pixels[2 * i] = static_cast<png_byte>(q >> 8);
            pixels[2 * i + 1] = static_cast<png_byte>(q & 0xff);
        } else {
            pixels[i] = static_cast<png_byte>(q);
        }
    }
    std::vector<png_bytep> rows(x.height());
    for (std::size_t r = 0; r < x.height(); ++r) rows[r] = pixels.data() + r * x.width() * bps;

    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw Error(ErrorCode::Unwritable, path.string());
    if (!write_png_raw(fp.get(), static_cast<png_uint_32>(x.width()), static_cast<png_uint_32>(x.height()),
                       bitdepth, rows.data())) {
        throw Error(ErrorCode::Unwritable, path.string() + ": libpng encode failure");
    }
}

}  // namespace

bool is_image_file(const std::filesystem::path& path) {
    const auto ext = lower_extension(path);
    return ext == ".png" || ext == ".pgm";
}

ImageTensor load_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::Unreadable, path.string());
    const auto ext = lower_extension(path);
    if (ext == ".png") return load_png(path);
    if (ext == ".pgm") return load_pgm(path);
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": expected .png or .pgm");
}

void save_image(const ImageTensor& x, const std::filesystem::path& path, int bitdepth) {
    if (x.batch() != 1) throw Error(ErrorCode::InvalidArgument, "save_image expects B=1");
    if (bitdepth != 8 && bitdepth != 16) {
        throw Error(ErrorCode::InvalidArgument, "bitdepth must be 8 or 16");
    }
    const auto ext = lower_extension(path);
    if (ext == ".png") return save_png(x, path, bitdepth);
    if (ext == ".pgm") return save_pgm(x, path, bitdepth);
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": expected .png or .pgm");
}

}  // namespace destripe
