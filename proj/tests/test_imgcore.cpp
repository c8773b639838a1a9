#include "destripe/error.hpp"
#include "destripe/image.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <limits>
#include <iterator>

using namespace destripe;
using testsupport::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string pgm8(std::size_t w, std::size_t h, unsigned char v) {
    return "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + std::string(w * h, static_cast<char>(v));
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected destripe::Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("load_image scales 8-bit PGM values") {
    TempDir dir("pgm");
    write_bytes(dir / "white.pgm", pgm8(4, 3, 255));
    write_bytes(dir / "black.pgm", pgm8(4, 3, 0));
    write_bytes(dir / "mid.pgm", pgm8(2, 2, 128));

    const ImageTensor white = load_image(dir / "white.pgm");
    CHECK(white.batch() == 1);
    CHECK(white.height() == 3);
    CHECK(white.width() == 4);
    for (float v : white.values()) CHECK(v == 1.0f);
    for (float v : testsupport::values_of(load_image(dir / "black.pgm"))) CHECK(v == 0.0f);
    for (float v : testsupport::values_of(load_image(dir / "mid.pgm"))) CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-7));
}

TEST_CASE("load_image reads 16-bit and ASCII PGM") {
    TempDir dir("pgm16");
    std::string p16 = "P5\n2 1\n65535\n";
    p16 += std::string("\xff\xff\x80\x00", 4);
    write_bytes(dir / "a.pgm", p16);
    const ImageTensor x = load_image(dir / "a.pgm");
    CHECK(x(0, 0, 0) == 1.0f);
    CHECK(x(0, 0, 1) == doctest::Approx(32768.0 / 65535.0));

    write_bytes(dir / "b.pgm", "P2\n# comment\n3 1\n255\n0 51 255\n");
    const ImageTensor y = load_image(dir / "b.pgm");
    CHECK(y(0, 0, 1) == doctest::Approx(0.2));
}

TEST_CASE("load_image error codes are distinct") {
    TempDir dir("pgm_err");
    CHECK(code_of([&] { load_image(dir / "missing.png"); }) == ErrorCode::Unreadable);
    write_bytes(dir / "x.bmp", "BM");
    CHECK(code_of([&] { load_image(dir / "x.bmp"); }) == ErrorCode::UnsupportedFormat);
    write_bytes(dir / "rgb.pgm", "P6\n1 1\n255\nabc");
    CHECK(code_of([&] { load_image(dir / "rgb.pgm"); }) == ErrorCode::UnsupportedFormat);
    write_bytes(dir / "short.pgm", "P5\n4 4\n255\nab");
    CHECK(code_of([&] { load_image(dir / "short.pgm"); }) == ErrorCode::Truncated);
    write_bytes(dir / "fake.png", "not a png at all");
    CHECK(code_of([&] { load_image(dir / "fake.png"); }) == ErrorCode::UnsupportedFormat);
}

TEST_CASE("save_image quantizes with rounding") {
    TempDir dir("save");
    ImageTensor zeros(1, 2, 3, 0.0f), ones(1, 2, 3, 1.0f), six(1, 1, 1, 0.6f);
    save_image(zeros, dir / "z.pgm", 8);
    save_image(ones, dir / "o.pgm", 8);
    save_image(six, dir / "s.pgm", 8);
    CHECK(read_bytes(dir / "z.pgm") == "P5\n3 2\n255\n" + std::string(6, '\0'));
    CHECK(read_bytes(dir / "o.pgm") == "P5\n3 2\n255\n" + std::string(6, '\xff'));
    CHECK(read_bytes(dir / "s.pgm").back() == static_cast<char>(153));

    CHECK_THROWS_AS(save_image(ImageTensor(2, 2, 2), dir / "b.png", 8), Error);
    CHECK_THROWS_AS(save_image(zeros, dir / "bad.png", 12), Error);
    CHECK(code_of([&] { save_image(zeros, dir / "no_such_dir" / "x.png", 8); }) == ErrorCode::Unwritable);
}

TEST_CASE("load(save(x)) is within half a quantization step") {
    TempDir dir("roundtrip");
    const ImageTensor x = testsupport::random_image(3, 0, 1, 17, 23, -0.2, 1.2);
    const ImageTensor clamped = clamp01(x);
    for (int bits : {8, 16}) {
        const double step = 1.0 / ((1 << bits) - 1);
        for (const char* ext : {".png", ".pgm"}) {
            const auto path = dir / (std::string("rt") + std::to_string(bits) + ext);
            save_image(x, path, bits);
            const ImageTensor back = load_image(path);
            REQUIRE(back.same_shape(x));
            CHECK(testsupport::max_abs_diff(back, clamped) <= 0.5 * step + 1e-7);
        }
    }
}

TEST_CASE("DSTV header layout is bit-exact") {
    TensorFile t{{2, 3, 4}, std::vector<float>(24, 1.5f)};
    const auto bytes = encode_tensor(t);
    REQUIRE(bytes.size() == 4 + 1 + 1 + 12 + 96);
    const std::vector<std::uint8_t> header(bytes.begin(), bytes.begin() + 18);
    const std::vector<std::uint8_t> expected{'D', 'S', 'T', 'V', 1, 3, 2, 0, 0, 0, 3, 0, 0, 0, 4, 0, 0, 0};
    CHECK(header == expected);
    // 1.5f = 0x3FC00000, little-endian
    CHECK(bytes[18] == 0x00);
    CHECK(bytes[19] == 0x00);
    CHECK(bytes[20] == 0xC0);
    CHECK(bytes[21] == 0x3F);
}

TEST_CASE("tensor_io is bitwise lossless") {
    TempDir dir("dstv");
    for (std::uint64_t id = 0; id < 20; ++id) {
        ImageTensor x = testsupport::random_image(11, id, 1 + id % 3, 1 + id % 7, 2 + id % 5, -1e6, 1e6);
        x.values()[0] = -0.0f;
        x.values()[x.size() - 1] = std::numeric_limits<float>::denorm_min();
        save_tensor(x, dir / "t.dstv");
        const ImageTensor y = load_tensor(dir / "t.dstv");
        REQUIRE(y.same_shape(x));
        CHECK(std::memcmp(x.values().data(), y.values().data(), x.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("tensor decoding rejects corrupt input without a partial tensor") {
    const auto good = encode_tensor({{1, 2, 2}, {0.f, 1.f, 2.f, 3.f}});
    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { decode_tensor(bad_magic); }) == ErrorCode::BadMagic);
    auto bad_version = good;
    bad_version[4] = 2;
    CHECK(code_of([&] { decode_tensor(bad_version); }) == ErrorCode::BadVersion);
    const std::vector<std::uint8_t> truncated(good.begin(), good.end() - 1);
    CHECK(code_of([&] { decode_tensor(truncated); }) == ErrorCode::Truncated);
    const std::vector<std::uint8_t> header_only(good.begin(), good.begin() + 8);
    CHECK(code_of([&] { decode_tensor(header_only); }) == ErrorCode::Truncated);
}

TEST_CASE("grad_v") {
    SUBCASE("hand example") {
        const ImageTensor x(1, 2, 2, {1, 2, 3, 4});
        const ImageTensor g = grad_v(x);
        CHECK(g.height() == 1);
        CHECK(g.width() == 2);
        CHECK(g(0, 0, 0) == 2.0f);
        CHECK(g(0, 0, 1) == 2.0f);
    }
    SUBCASE("column-constant and constant images vanish exactly") {
        for (std::uint64_t id = 0; id < 50; ++id) {
            const ImageTensor s = testsupport::column_constant(5, id, 2, 9, 13, 3.0);
            for (float v : testsupport::values_of(grad_v(s))) REQUIRE(v == 0.0f);
        }
        for (float v : testsupport::values_of(grad_v(ImageTensor(1, 4, 4, 0.3f)))) CHECK(v == 0.0f);
    }
    SUBCASE("needs two rows") { CHECK_THROWS_AS(grad_v(ImageTensor(1, 1, 5)), Error); }
}

TEST_CASE("extract_patches counts and tiling") {
    const ImageTensor x64 = testsupport::random_image(1, 1, 1, 64, 64);
    PatchSpec spec;
    const ImageTensor one = extract_patches(x64, spec);
    CHECK(one.batch() == 1);
    CHECK(one == x64);

    const ImageTensor x128 = testsupport::random_image(1, 2, 1, 128, 128);
    CHECK(extract_patches(x128, spec).batch() == 4);

    spec.rotate90 = true;
    const ImageTensor rot = extract_patches(x128, spec);
    CHECK(rot.batch() == 8);
    CHECK(rot.item(1) == rotate90(rot.item(0)));

    spec.scale2x = true;
    CHECK(extract_patches(x128, spec).batch() == 12);

    PatchSpec odd{16, 5};
    const ImageTensor x = testsupport::random_image(1, 3, 2, 40, 33);
    CHECK(patch_count(x, odd) == 2 * ((40 - 16) / 5 + 1) * ((33 - 16) / 5 + 1));
    CHECK(extract_patches(x, odd).batch() == patch_count(x, odd));

    CHECK_THROWS_AS(extract_patches(ImageTensor(1, 32, 32), PatchSpec{}), Error);
    CHECK_THROWS_AS(extract_patches(x64, PatchSpec{4, 4}), Error);
    CHECK_THROWS_AS(extract_patches(x64, PatchSpec{8, 0}), Error);
}

TEST_CASE("stride == size partitions the cropped region") {
    const ImageTensor x = testsupport::random_image(2, 9, 1, 50, 70);
    const PatchSpec spec{16, 16};
    const ImageTensor patches = extract_patches(x, spec);
    const std::size_t rows = 50 / 16, cols = 70 / 16;
    REQUIRE(patches.batch() == rows * cols);
    for (std::size_t pr = 0; pr < rows; ++pr) {
        for (std::size_t pc = 0; pc < cols; ++pc) {
            for (std::size_t r = 0; r < 16; ++r) {
                for (std::size_t c = 0; c < 16; ++c) {
                    REQUIRE(patches(pr * cols + pc, r, c) == x(0, pr * 16 + r, pc * 16 + c));
                }
            }
        }
    }
}

TEST_CASE("rotate90 four times is the identity") {
    const ImageTensor x = testsupport::random_image(4, 4, 2, 5, 7);
    CHECK(rotate90(rotate90(rotate90(rotate90(x)))) == x);
    const ImageTensor r = rotate90(x);
    CHECK(r.height() == 7);
    CHECK(r(0, 0, 0) == x(0, 0, 6));
}

TEST_CASE("tensor construction invariants") {
    CHECK_THROWS_AS(ImageTensor(0, 1, 1), Error);
    CHECK_THROWS_AS(ImageTensor(1, 2, 2, std::vector<float>(3)), Error);
    ImageTensor bad(1, 1, 2);
    bad.values()[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(require_finite(bad, "x"), Error);
}
