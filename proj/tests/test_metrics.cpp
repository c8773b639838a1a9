#include "destripe/error.hpp"
#include "destripe/metrics.hpp"
#include "golden_values.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace destripe;
using namespace destripe::metrics;

namespace {

ImageTensor shifted(const ImageTensor& x, float d) {
    ImageTensor y = x;
    for (float& v : y.values()) v += d;
    return y;
}

ImageTensor noisy(const ImageTensor& x, double amp, std::uint64_t id) {
    return testsupport::add(x, testsupport::random_image(77, id, x.batch(), x.height(), x.width(), -amp, amp));
}

}  // namespace

TEST_CASE("window taps") {
    const auto taps = gaussian_taps(11, 1.5);
    double sum = 0.0;
    for (double t : taps) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(taps[5] > taps[4]);
    CHECK(taps[0] == doctest::Approx(taps[10]));
    CHECK(adapted_window(SsimParams{}, 64, 64) == 11);
    CHECK(adapted_window(SsimParams{}, 4, 8) == 4);
    SsimParams bad;
    bad.c1 = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("psnr closed forms") {
    const ImageTensor x = testsupport::random_image(1, 0, 2, 32, 32, 0.0, 0.9);
    CHECK(std::isinf(psnr(x, x)));
    CHECK(psnr(x, x) > 0);
    CHECK(psnr(x, shifted(x, 0.1f)) == doctest::Approx(20.0).epsilon(1e-6));
    const ImageTensor y = noisy(x, 0.1, 1);
    CHECK(psnr(x, y) == psnr(y, x));
    CHECK(psnr(x, noisy(x, 0.05, 2)) > psnr(x, noisy(x, 0.1, 2)));
    CHECK_THROWS_AS(psnr(x, ImageTensor(2, 32, 31)), Error);
}

TEST_CASE("ssim closed forms") {
    const SsimParams p;
    const ImageTensor x = testsupport::random_image(2, 0, 1, 48, 40);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ms_ssim(x, x) == doctest::Approx(1.0).epsilon(1e-6));

    const double expect = (2 * 0.2 * 0.8 + p.c1) / (0.04 + 0.64 + p.c1);
    CHECK(ssim(ImageTensor(1, 16, 16, 0.2f), ImageTensor(1, 16, 16, 0.8f)) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(expect == doctest::Approx(0.4707).epsilon(1e-4));

    const ImageTensor y = noisy(x, 0.2, 3);
    CHECK(std::abs(ssim(x, y) - ssim(y, x)) < 1e-6);
    CHECK(std::abs(ms_ssim(x, y) - ms_ssim(y, x)) < 1e-6);
    CHECK(ssim(x, y) < 1.0);
    CHECK(ssim(x, y) >= -1.0);

    SsimParams one;
    one.scales = 1;
    CHECK(ms_ssim(x, y, one) == ssim(x, y));
}

TEST_CASE("ms_ssim matches the straight-line oracle") {
    for (std::uint64_t id = 0; id < 4; ++id) {
        const ImageTensor x = testsupport::random_image(5, id, 1, 64, 64);
        const ImageTensor y = clamp01(noisy(x, 0.15, id));
        for (std::size_t scales : {1u, 3u, 5u}) {
            SsimParams p;
            p.scales = int(scales);
            CHECK(std::abs(ms_ssim(x, y, p) - oracle::ms_ssim(x, y, scales)) < 1e-6);
        }
        for (double a : {0.0, 0.5, 0.84, 1.0}) CHECK(std::abs(mix_distance(x, y, a) - oracle::mix_distance(x, y, a)) < 1e-6);
    }
}

TEST_CASE("frozen reference values on the pinned pair") {
    const auto [x, y] = golden::pinned_pair();
    CHECK(testsupport::rel_close(ssim(x, y), golden::kSsim, 1e-6));
    CHECK(testsupport::rel_close(ms_ssim(x, y), golden::kMsSsimM5, 1e-6));
    CHECK(testsupport::rel_close(psnr(x, y), golden::kPsnrXY, 1e-6));
    CHECK(testsupport::rel_close(mix_distance(x, y, 0.0), golden::kMixDistanceA0, 1e-6));
    CHECK(testsupport::rel_close(mix_distance(x, y, 0.84), golden::kMixDistanceA084, 1e-6));
    CHECK(testsupport::rel_close(mix_distance(x, y, 1.0), golden::kMixDistanceA1, 1e-6));
}

TEST_CASE("mix_distance closed forms") {
    const ImageTensor x = testsupport::random_image(6, 0, 2, 64, 64, 0.0, 0.9);
    for (double a : {0.0, 0.5, 0.84, 1.0}) CHECK(mix_distance(x, x, a) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mix_distance(x, shifted(x, 0.1f), 0.0) == doctest::Approx(0.1).epsilon(1e-6));
    const ImageTensor y = noisy(x, 0.1, 9);
    CHECK(mix_distance(x, y, 1.0) == doctest::Approx(1.0 - ms_ssim(x, y)).epsilon(1e-12));
    for (double a : {0.0, 0.3, 1.0}) CHECK(mix_distance(x, y, a) >= 0.0);
    CHECK_THROWS_AS(mix_distance(x, y, 1.5), Error);
    CHECK_THROWS_AS(mix_distance(x, y, -0.1), Error);
}

TEST_CASE("ms_ssim rejects inputs too small for the scale count") {
    CHECK_THROWS_AS(ms_ssim(ImageTensor(1, 8, 8, 0.5f), ImageTensor(1, 8, 8, 0.5f)), Error);
    SsimParams p;
    p.scales = 4;
    CHECK_NOTHROW(ms_ssim(ImageTensor(1, 8, 8, 0.5f), ImageTensor(1, 8, 8, 0.5f), p));
}

TEST_CASE("avg_pool2") {
    const ImageTensor x(1, 3, 4, {1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 9});
    const ImageTensor p = avg_pool2(x);
    CHECK(p.height() == 1);
    CHECK(p.width() == 2);
    CHECK(p(0, 0, 0) == 3.5f);
    CHECK(p(0, 0, 1) == 5.5f);
}

TEST_CASE("report formatting") {
    CHECK(format_value(kPsnrInfinity) == "inf");
    CHECK(format_value(1.0) == "1.000000");
    CHECK(format_value(20.1234567) == "20.123457");
    MetricsReport r;
    r.rows.push_back({"a.png", 10.0, 0.5, 0.25});
    r.rows.push_back({"b.png", 20.0, 1.0, 0.75});
    CHECK(r.to_csv() ==
          "name,psnr,ssim,ms_ssim\n"
          "a.png,10.000000,0.500000,0.250000\n"
          "b.png,20.000000,1.000000,0.750000\n"
          "mean,15.000000,0.750000,0.500000\n");
    const ImageTensor x = testsupport::random_image(1, 1, 1, 16, 16);
    const MetricsRow same = evaluate_pair("x", x, x);
    CHECK(std::isinf(same.psnr));
    CHECK(format_value(same.ssim) == "1.000000");
    CHECK(format_value(same.ms_ssim) == "1.000000");
}
