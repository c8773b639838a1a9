// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "destripe/harness.hpp"
#include "destripe/losses.hpp"
#include "destripe/metrics.hpp"
#include "destripe/sgm.hpp"
#include "destripe/wavelet.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>

using namespace destripe;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double sum_sq(const ImageTensor& x) {
    double s = 0.0;
    for (float v : x.values()) s += double(v) * v;
    return s;
}

Outcome haar_reconstruction() {
    Outcome o;
    const auto t0 = Clock::now();
    double worst_err = 0.0, worst_energy = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const ImageTensor x = testsupport::random_image(101, i, 1, 64, 64);
        const double e = sum_sq(x);
        for (std::size_t L = 1; L <= 3; ++L) {
            const auto p = wavelet::haar_decompose(x, L);
            worst_err = std::max(worst_err, testsupport::max_abs_diff(wavelet::haar_reconstruct(p), x));
            worst_energy = std::max(worst_energy, std::abs(e - p.energy()) / e);
        }
    }
    const double t = seconds_since(t0);
    o.require(worst_err < 1e-5, "reconstruction error " + fmt("%.3g", worst_err));
    o.require(worst_energy < 1e-6, "energy error " + fmt("%.3g", worst_energy));
    o.require(t < 10.0, "runtime " + fmt("%.2f s", t));
    if (o.ok) o.detail = "max err " + fmt("%.2g", worst_err) + ", energy " + fmt("%.2g", worst_energy) + ", " + fmt("%.2f s", t);
    return o;
}

Outcome column_constant_annihilation() {
    Outcome o;
    const losses::LossWeights w;
    double worst_h = 0.0, worst_cyc = 0.0, worst_lh = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const ImageTensor x = testsupport::random_image(202, i, 1, 64, 64);
        const ImageTensor s = testsupport::column_constant(202, i, 1, 64, 64, 0.25);
        const ImageTensor xs = testsupport::add(x, s);
        for (float v : testsupport::values_of(grad_v(s))) {
            if (v != 0.0f) o.require(false, "grad_v of field not exactly zero");
        }
        worst_h = std::max(worst_h, testsupport::max_abs_diff(wavelet::hbgm(xs), wavelet::hbgm(x)));
        worst_cyc = std::max(worst_cyc, losses::loss_cyc_stripe(x, xs, w));
        worst_lh = std::max(worst_lh, losses::loss_hbgm(x, xs, 3, w));
    }
    o.require(worst_h < 1e-5, "hbgm difference " + fmt("%.3g", worst_h));
    o.require(worst_cyc < 1e-6, "loss_cyc_stripe " + fmt("%.3g", worst_cyc));
    o.require(worst_lh < 1e-6, "loss_hbgm " + fmt("%.3g", worst_lh));
    if (o.ok) {
        o.detail = "hbgm " + fmt("%.2g", worst_h) + ", cyc_s " + fmt("%.2g", worst_cyc) + ", l_h " + fmt("%.2g", worst_lh);
    }
    return o;
}

Outcome metric_closed_forms() {
    Outcome o;
    const ImageTensor x = testsupport::random_image(303, 0, 1, 64, 64, 0.0, 0.9);
    ImageTensor y = x;
    for (float& v : y.values()) v += 0.1f;
    const double p = metrics::psnr(x, y);
    o.require(std::abs(p - 20.0) <= 1e-4, "psnr " + fmt("%.6f", p));
    const double s = metrics::ssim(x, x);
    o.require(std::abs(s - 1.0) <= 1e-6, "ssim(x,x) " + fmt("%.9f", s));
    const ImageTensor z = clamp01(testsupport::add(x, testsupport::random_image(303, 1, 1, 64, 64, -0.2, 0.2)));
    metrics::SsimParams one;
    one.scales = 1;
    o.require(metrics::ms_ssim(x, z, one) == metrics::ssim(x, z), "ms_ssim(M=1) differs from ssim");
    for (double a : {0.0, 0.5, 0.84, 1.0}) {
        const double d = metrics::mix_distance(x, x, a);
        o.require(d == 0.0, "mix_distance(x,x," + fmt("%.2f", a) + ") = " + fmt("%.3g", d));
    }
    if (o.ok) o.detail = "psnr " + fmt("%.6f", p) + " dB";
    return o;
}

Outcome loss_arithmetic() {
    Outcome o;
    const losses::LossWeights w;
    const double total = losses::loss_total(1, 1, 1, 1, losses::loss_cross(1, 1, w), w);
    o.require(total == 131.01, "loss_total " + fmt("%.17g", total));
    const ImageTensor half(1, 8, 8, 0.5f);
    const double adv = losses::loss_adversarial({half, half, half}, w);
    o.require(std::abs(adv - 3 * std::log(0.5)) <= 1e-6, "loss_adversarial " + fmt("%.9f", adv));
    if (o.ok) o.detail = "total " + fmt("%.15g", total) + ", adv " + fmt("%.9f", adv);
    return o;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    return out;
}

Outcome sgm_statistics() {
    Outcome o;
    sgm::SgmConfig cfg;
    cfg.intensity_min = cfg.intensity_max = 0.1;
    double sq = 0.0, sum = 0.0;
    std::size_t n = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        for (int m = 0; m < 4; ++m) {
            for (float v : sgm::sample_stripe_field(cfg, m, 1, 512, k).row) {
                sum += v;
                sq += double(v) * v;
                ++n;
            }
        }
    }
    const double mean = sum / double(n);
    const double sd = std::sqrt(sq / double(n) - mean * mean);
    o.require(n >= 100000, "too few draws");
    o.require(std::abs(sd - 0.1) / 0.1 < 0.02, "std " + fmt("%.5f", sd));

    const ImageTensor cleans = testsupport::random_image(404, 0, 16, 64, 64);
    sgm::SgmConfig zero;
    zero.intensity_min = zero.intensity_max = 0.0;
    o.require(sgm::simulate_batch(cleans, zero, 4).stripy == cleans, "zero intensity changed the image");

    sgm::SgmConfig def;
    def.seed = 77;
    const ImageTensor a = sgm::simulate_batch(cleans, def, 1).stripy;
    const ImageTensor b = sgm::simulate_batch(cleans, def, 8).stripy;
    const ImageTensor c = sgm::simulate_batch(cleans, def, 1).stripy;
    o.require(std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(float)) == 0, "1 vs N threads differ");
    o.require(std::memcmp(a.values().data(), c.values().data(), a.size() * sizeof(float)) == 0, "rerun differs");

    testsupport::TempDir dir("acceptance_sgm");
    fs::create_directories(dir / "in");
    for (std::size_t i = 0; i < 4; ++i) save_image(cleans.item(i), dir / "in" / ("c" + std::to_string(i) + ".png"));
    harness::RunConfig rc;
    rc.input_dir = dir / "in";
    rc.sgm.seed = 77;
    rc.output_dir = dir / "t1";
    rc.threads = 1;
    harness::cmd_simulate(rc);
    rc.output_dir = dir / "tn";
    rc.threads = 4;
    harness::cmd_simulate(rc);
    o.require(read_tree(dir / "t1") == read_tree(dir / "tn"), "simulate output trees differ");
    if (o.ok) o.detail = "std " + fmt("%.5f", sd) + " over " + std::to_string(n) + " draws";
    return o;
}

Outcome intensity_monotonicity() {
    Outcome o;
    const auto t0 = Clock::now();
    ImageTensor cleans(50, 64, 64);
    for (std::size_t k = 0; k < 50; ++k) {
        for (std::size_t r = 0; r < 64; ++r) {
            for (std::size_t c = 0; c < 64; ++c) {
                cleans(k, r, c) = float(0.5 + 0.3 * std::sin(0.05 * double((k + 1) * r) + 0.13 * double(c) + double(k)));
            }
        }
    }
    std::string curve;
    double prev = INFINITY;
    for (double intensity : {0.025, 0.05, 0.075, 0.1, 0.125, 0.15}) {
        sgm::SgmConfig cfg;
        cfg.intensity_min = cfg.intensity_max = intensity;
        const ImageTensor s = sgm::simulate_batch(cleans, cfg, 4).stripy;
        double mean = 0.0;
        for (std::size_t k = 0; k < 50; ++k) mean += metrics::psnr(cleans.item(k), s.item(k));
        mean /= 50.0;
        o.require(mean < prev, "not decreasing at " + fmt("%.3f", intensity));
        prev = mean;
        curve += (curve.empty() ? "" : " > ") + fmt("%.2f", mean);
    }
    const double t = seconds_since(t0);
    o.require(t < 60.0, "runtime " + fmt("%.2f s", t));
    if (o.ok) o.detail = curve + " dB, " + fmt("%.2f s", t);
    return o;
}

Outcome bundle_closure() {
    Outcome o;
    testsupport::TempDir dir("acceptance_bundle");
    const std::size_t n = harness::cmd_export_vectors(dir.path(), 0);
    const auto checks = harness::verify_vectors(dir.path());
    std::size_t passed = 0;
    for (const auto& c : checks) {
        if (c.ok) {
            ++passed;
        } else {
            o.require(false, c.name + ": " + c.message);
        }
    }
    o.require(checks.size() == n + 1, "unexpected check count");
    o.detail = o.ok ? std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks" : o.detail;
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"haar_perfect_reconstruction", haar_reconstruction},
        {"column_constant_annihilation", column_constant_annihilation},
        {"metric_closed_forms", metric_closed_forms},
        {"loss_arithmetic", loss_arithmetic},
        {"sgm_statistics", sgm_statistics},
        {"intensity_monotonicity", intensity_monotonicity},
        {"golden_bundle_closure", bundle_closure},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.ok ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
