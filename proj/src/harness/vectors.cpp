#include "destripe/error.hpp"
#include "destripe/harness.hpp"
#include "destripe/rng.hpp"
#include "destripe/wavelet.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

namespace destripe::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kBatch = 2;
constexpr std::size_t kSide = 64;
constexpr std::size_t kLevels = 3;
constexpr std::uint64_t kBundleStream = 0xB0D1E;

ImageTensor structured_image(std::uint64_t seed) {
    const auto rng = CounterRng::stream(seed, kBundleStream, 0);
    ImageTensor x(kBatch, kSide, kSide);
    std::uint64_t i = 0;
    for (std::size_t b = 0; b < kBatch; ++b) {
        for (std::size_t r = 0; r < kSide; ++r) {
            for (std::size_t c = 0; c < kSide; ++c) {
                const double base = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * r / 23.0 + double(b)) *
                                              std::cos(2.0 * std::numbers::pi * c / 17.0);
                x(b, r, c) = static_cast<float>(std::clamp(base + 0.1 * (rng.uniform(i++) - 0.5), 0.0, 1.0));
            }
        }
    }
    return x;
}

ImageTensor perturbed(const ImageTensor& x, double amplitude, std::uint64_t seed, std::uint64_t id) {
    const auto rng = CounterRng::stream(seed, kBundleStream, id);
    ImageTensor out = x;
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<float>(std::clamp(v[i] + amplitude * (2.0 * rng.uniform(i) - 1.0), 0.0, 1.0));
    }
    return out;
}

ImageTensor scores(std::uint64_t seed, std::uint64_t id, bool saturate) {
    const auto rng = CounterRng::stream(seed, kBundleStream, id);
    ImageTensor out(kBatch, 8, 8);
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(0.05 + 0.9 * rng.uniform(i));
    if (saturate) {
        v[0] = 0.0f;
        v[1] = 1.0f;
    }
    return out;
}

sgm::SgmConfig bundle_sgm(std::uint64_t seed) {
    sgm::SgmConfig cfg;
    cfg.seed = seed;
    return cfg;
}

losses::LossWeights weights_from(const json& params) {
    losses::LossWeights w;
    w.alpha = params.value("alpha", w.alpha);
    w.lambda1 = params.value("lambda1", w.lambda1);
    w.lambda2 = params.value("lambda2", w.lambda2);
    w.lambda3 = params.value("lambda3", w.lambda3);
    w.lambda4 = params.value("lambda4", w.lambda4);
    w.lambda5 = params.value("lambda5", w.lambda5);
    w.k = params.value("k", w.k);
    w.eps_log = params.value("eps_log", w.eps_log);
    return w;
}

json weights_json(const losses::LossWeights& w) {
    return {{"alpha", w.alpha},     {"lambda1", w.lambda1}, {"lambda2", w.lambda2}, {"lambda3", w.lambda3},
            {"lambda4", w.lambda4}, {"lambda5", w.lambda5}, {"k", w.k},             {"eps_log", w.eps_log}};
}

json components_json(const losses::LossComponents& c) {
    return {{"cyc_c", c.cyc_c}, {"cyc_s", c.cyc_s}, {"l_h", c.l_h},         {"l_perc", c.l_perc},
            {"l_iden", c.l_iden}, {"l_adv", c.l_adv}, {"l_cross", c.l_cross}, {"l_total", c.l_total}};
}

sgm::StripeField field_from_matrix(const ImageTensor& m, int order) {
    sgm::StripeField f;
    f.order = order;
    f.height = m.height();
    auto first = m.plane(0).subspan(0, m.width());
    f.row.assign(first.begin(), first.end());
    if (!(f.matrix() == m.item(0))) throw Error(ErrorCode::InvalidArgument, "stripe field is not column-constant");
    return f;
}

struct Evaluated {
    std::optional<double> scalar;
    std::optional<ImageTensor> tensor;
    std::optional<losses::LossComponents> components;
};

Evaluated evaluate_entry(const json& entry, const fs::path& dir) {
    const std::string op = entry.at("op");
    const json& params = entry.value("param_map", json::object());
    std::vector<ImageTensor> in;
    for (const auto& f : entry.value("input_files", json::array())) in.push_back(load_tensor(dir / f.get<std::string>()));
    auto need = [&](std::size_t n) {
        if (in.size() != n) throw Error(ErrorCode::InvalidArgument, op + " expects " + std::to_string(n) + " inputs");
    };
    const losses::LossWeights w = weights_from(params);
    metrics::SsimParams sp;
    sp.scales = params.value("scales", sp.scales);
    const std::size_t levels = params.value("levels", kLevels);

    Evaluated out;
    if (op == "grad_v") {
        need(1);
        out.tensor = grad_v(in[0]);
    } else if (op == "haar_decompose") {
        need(1);
        const auto p = wavelet::haar_decompose(in[0], levels);
        const auto names = wavelet::subband_names(levels);
        const auto bands = wavelet::subbands_in_order(p);
        const auto it = std::find(names.begin(), names.end(), params.at("subband").get<std::string>());
        if (it == names.end()) throw Error(ErrorCode::InvalidArgument, "unknown subband");
        out.tensor = *bands[static_cast<std::size_t>(it - names.begin())];
    } else if (op == "haar_reconstruct") {
        need(3 * levels + 1);
        out.tensor = wavelet::haar_reconstruct(wavelet::pyramid_from_subbands(in, levels));
    } else if (op == "hbgm") {
        need(1);
        out.tensor = wavelet::hbgm(in[0], {levels});
    } else if (op == "apply_sgm") {
        need(5);
        sgm::StripeSet set;
        for (int m = 0; m < 4; ++m) set[m] = field_from_matrix(in[1 + m], m);
        out.tensor = sgm::apply_sgm(in[0], set, params.value("clamp_output", true));
    } else if (op == "psnr") {
        need(2);
        out.scalar = metrics::psnr(in[0], in[1]);
    } else if (op == "ssim") {
        need(2);
        out.scalar = metrics::ssim(in[0], in[1], sp);
    } else if (op == "ms_ssim") {
        need(2);
        out.scalar = metrics::ms_ssim(in[0], in[1], sp);
    } else if (op == "mix_distance") {
        need(2);
        out.scalar = metrics::mix_distance(in[0], in[1], w.alpha, sp);
    } else if (op == "loss_cyc_clean") {
        need(2);
        out.scalar = losses::loss_cyc_clean(in[0], in[1], w);
    } else if (op == "loss_cyc_stripe") {
        need(2);
        out.scalar = losses::loss_cyc_stripe(in[0], in[1], w);
    } else if (op == "loss_hbgm") {
        need(2);
        out.scalar = losses::loss_hbgm(in[0], in[1], levels, w);
    } else if (op == "loss_perceptual") {
        need(2);
        out.scalar = losses::loss_perceptual(in[0], in[1], *losses::make_extractor(params.at("extractor").get<std::string>()));
    } else if (op == "loss_identity") {
        need(2);
        out.scalar = losses::loss_identity(in[0], in[1], w);
    } else if (op == "loss_adversarial") {
        need(3);
        out.scalar = losses::loss_adversarial({in[0], in[1], in[2]}, w);
    } else if (op == "loss_cross") {
        need(0);
        out.scalar = losses::loss_cross(params.at("l_h").get<double>(), params.at("l_perc").get<double>(), w);
    } else if (op == "loss_total") {
        need(0);
        out.scalar = losses::loss_total(params.at("l_adv").get<double>(), params.at("l_cyc_s").get<double>(),
                                        params.at("l_cyc_c").get<double>(), params.at("l_iden").get<double>(),
                                        params.at("l_cross").get<double>(), w);
    } else if (op == "loss_eval") {
        need(9);
        losses::LossInputs li{in[0], in[1], in[2], in[3], in[4], in[5], {in[6], in[7], in[8]}};
        out.components =
            losses::evaluate_losses(li, w, levels, *losses::make_extractor(params.value("extractor", "identity")));
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown op '" + op + "'");
    }
    return out;
}

double scalar_error(double got, double expected) {
    if (got == expected) return 0.0;  // covers matching infinities
    if (!std::isfinite(got) || !std::isfinite(expected)) return std::numeric_limits<double>::infinity();
    return std::abs(got - expected) / std::max(std::abs(expected), 1e-12);
}

class BundleWriter {
public:
    BundleWriter(fs::path dir, std::uint64_t seed) : dir_(std::move(dir)), seed_(seed) {}

    std::string tensor(const std::string& file, const ImageTensor& t) {
        save_tensor(t, dir_ / file);
        files_.insert(file);
        return file;
    }

    /// Evaluates the entry through the same path the verifier uses and
    /// records the result as its expectation.
    void entry(const std::string& name, const std::string& op, std::vector<std::string> inputs, json params) {
        json e = {{"name", name}, {"op", op}, {"input_files", inputs}, {"param_map", std::move(params)}};
        const Evaluated v = evaluate_entry(e, dir_);
        if (v.scalar) {
            e["expected_scalar"] = *v.scalar;
        } else if (v.tensor) {
            e["expected_tensor_file"] = tensor("expected_" + name + ".dstv", *v.tensor);
        } else {
            e["expected_components"] = components_json(*v.components);
        }
        entries_.push_back(std::move(e));
    }

    void pinned_scalar(const std::string& name, const std::string& op, json params, double expected) {
        entries_.push_back({{"name", name},
                            {"op", op},
                            {"input_files", json::array()},
                            {"param_map", std::move(params)},
                            {"expected_scalar", expected}});
    }

    void text_file(const std::string& file, const std::string& contents) {
        std::ofstream out(dir_ / file, std::ios::trunc);
        out << contents;
        if (!out) throw Error(ErrorCode::Unwritable, (dir_ / file).string());
        files_.insert(file);
    }

    std::size_t finish() {
        json manifest = {{"version", kBundleVersion},
                         {"seed", seed_},
                         {"tolerance", kBundleTolerance},
                         {"entries", entries_},
                         {"files", std::vector<std::string>(files_.begin(), files_.end())}};
        std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
        out << manifest.dump(2) << '\n';
        if (!out) throw Error(ErrorCode::Unwritable, (dir_ / "manifest.json").string());
        return entries_.size();
    }

private:
    fs::path dir_;
    std::uint64_t seed_;
    json entries_ = json::array();
    std::set<std::string> files_;
};

}  // namespace

std::size_t cmd_export_vectors(const fs::path& out_dir, std::uint64_t seed) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw Error(ErrorCode::Unwritable, out_dir.string());
    fs::remove(out_dir / "manifest.json", ec);

    BundleWriter bw(out_dir, seed);
    using F = LossEvalFiles;

    const ImageTensor clean = structured_image(seed);
    const auto sim = sgm::simulate_batch(clean, bundle_sgm(seed), 1, 0);
    const ImageTensor clean_hat = perturbed(clean, 0.03, seed, 1);
    const ImageTensor clean_cycled = perturbed(clean, 0.05, seed, 2);
    const ImageTensor clean_identity = perturbed(clean, 0.01, seed, 3);
    const auto resim = sgm::simulate_batch(clean_hat, bundle_sgm(seed), 1, kBatch);

    const std::string c = bw.tensor(F::clean, clean);
    const std::string s = bw.tensor(F::stripy, sim.stripy);
    const std::string ch = bw.tensor(F::clean_hat, clean_hat);
    const std::string ct = bw.tensor(F::clean_cycled, clean_cycled);
    const std::string gc = bw.tensor(F::clean_identity, clean_identity);
    const std::string st = bw.tensor(F::stripy_cycled, resim.stripy);
    const std::string dr = bw.tensor(F::d_real, scores(seed, 4, false));
    const std::string dh = bw.tensor(F::d_fake_hat_s, scores(seed, 5, false));
    const std::string ds = bw.tensor(F::d_fake_s, scores(seed, 6, false));
    const std::string dsat = bw.tensor("d_saturated.dstv", scores(seed, 7, true));

    // Single-image views for the SGM entries.
    const std::string c0 = bw.tensor("C0.dstv", clean.item(0));
    std::vector<std::string> sgm_inputs{c0};
    for (const auto& f : sim.fields[0]) sgm_inputs.push_back(bw.tensor("A" + std::to_string(f.order) + ".dstv", f.matrix()));
    bw.entry("apply_sgm_clamped", "apply_sgm", sgm_inputs, {{"clamp_output", true}});
    bw.entry("apply_sgm_unclamped", "apply_sgm", sgm_inputs, {{"clamp_output", false}});

    bw.entry("grad_v", "grad_v", {s}, json::object());

    std::vector<std::string> subband_files;
    const auto pyramid = wavelet::haar_decompose(clean, kLevels);
    const auto names = wavelet::subband_names(kLevels);
    const auto bands = wavelet::subbands_in_order(pyramid);
    for (std::size_t i = 0; i < names.size(); ++i) {
        bw.entry("haar_decompose_" + names[i], "haar_decompose", {c}, {{"levels", kLevels}, {"subband", names[i]}});
        subband_files.push_back(bw.tensor("subband_" + names[i] + ".dstv", *bands[i]));
    }
    bw.entry("haar_reconstruct", "haar_reconstruct", subband_files, {{"levels", kLevels}});
    for (std::size_t l = 1; l <= kLevels; ++l) {
        bw.entry("hbgm_L" + std::to_string(l), "hbgm", {s}, {{"levels", l}});
    }

    bw.entry("psnr", "psnr", {c, s}, json::object());
    bw.entry("ssim", "ssim", {c, s}, json::object());
    for (std::size_t m : {1, 3, 5}) bw.entry("ms_ssim_M" + std::to_string(m), "ms_ssim", {c, s}, {{"scales", m}});
    for (double a : {0.0, 0.5, 0.84, 1.0}) {
        char nm[32];
        std::snprintf(nm, sizeof nm, "mix_distance_a%.2f", a);
        bw.entry(nm, "mix_distance", {c, s}, {{"alpha", a}});
    }

    const losses::LossWeights w;
    bw.entry("loss_cyc_clean", "loss_cyc_clean", {c, ct}, weights_json(w));
    bw.entry("loss_cyc_stripe", "loss_cyc_stripe", {s, st}, weights_json(w));
    bw.entry("loss_hbgm", "loss_hbgm", {s, ch}, [&] {
        json p = weights_json(w);
        p["levels"] = kLevels;
        return p;
    }());
    bw.entry("loss_perceptual_identity", "loss_perceptual", {s, ch}, {{"extractor", "identity"}});
    bw.entry("loss_perceptual_convstack", "loss_perceptual", {s, ch}, {{"extractor", "convstack"}});
    bw.entry("loss_identity", "loss_identity", {c, gc}, weights_json(w));
    bw.entry("loss_adversarial", "loss_adversarial", {dr, dh, ds}, weights_json(w));
    bw.entry("loss_adversarial_saturated", "loss_adversarial", {dsat, dsat, dsat}, weights_json(w));

    json cross = weights_json(w);
    cross["l_h"] = 0.25;
    cross["l_perc"] = 0.5;
    bw.entry("loss_cross", "loss_cross", {}, cross);
    json total = weights_json(w);
    total.update({{"l_adv", -1.5}, {"l_cyc_s", 0.02}, {"l_cyc_c", 0.03}, {"l_iden", 0.01}, {"l_cross", 0.25}});
    bw.entry("loss_total", "loss_total", {}, total);
    json unit = weights_json(w);
    unit.update({{"l_adv", 1.0}, {"l_cyc_s", 1.0}, {"l_cyc_c", 1.0}, {"l_iden", 1.0}, {"l_cross", 1.001}});
    bw.pinned_scalar("loss_total_unit", "loss_total", unit, 131.01);

    const std::vector<std::string> all{c, ct, s, st, ch, gc, dr, dh, ds};
    for (const char* extractor : {"identity", "convstack"}) {
        json p = weights_json(w);
        p["levels"] = kLevels;
        p["extractor"] = extractor;
        bw.entry(std::string("loss_eval_") + extractor, "loss_eval", all, p);
    }
    bw.text_file("loss_eval.cfg",
                 "# loss-eval --inputs <bundle> --config <bundle>/loss_eval.cfg\n"
                 "alpha = 0.84\nlambda1 = 1\nlambda2 = 100\nlambda3 = 10\nlambda4 = 10\nlambda5 = 10\n"
                 "k = 0.001\nhbgm_levels = 3\nextractor = identity\n");
    return bw.finish();
}

std::vector<EntryCheck> verify_vectors(const fs::path& bundle_dir, double tolerance) {
    std::ifstream in(bundle_dir / "manifest.json");
    if (!in) throw Error(ErrorCode::Unreadable, (bundle_dir / "manifest.json").string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("manifest.json: ") + e.what());
    }
    if (manifest.value("version", 0) != kBundleVersion) throw Error(ErrorCode::BadVersion, "bundle version");

    std::vector<EntryCheck> checks;
    {
        EntryCheck listing{"<file listing>", true, 0.0, {}};
        std::set<std::string> listed;
        for (const auto& f : manifest.at("files")) listed.insert(f.get<std::string>());
        std::set<std::string> present;
        for (const auto& e : fs::directory_iterator(bundle_dir)) {
            if (e.is_regular_file() && e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
        }
        if (listed != present) {
            listing.ok = false;
            listing.message = "manifest file list differs from directory contents";
        }
        checks.push_back(listing);
    }

    for (const auto& entry : manifest.at("entries")) {
        EntryCheck check{entry.at("name").get<std::string>(), false, 0.0, {}};
        try {
            const Evaluated got = evaluate_entry(entry, bundle_dir);
            if (entry.contains("expected_scalar")) {
                check.error = scalar_error(got.scalar.value(), entry.at("expected_scalar").get<double>());
            } else if (entry.contains("expected_tensor_file")) {
                const ImageTensor expected = load_tensor(bundle_dir / entry.at("expected_tensor_file").get<std::string>());
                const ImageTensor& t = got.tensor.value();
                require_same_shape(t, expected, "expected tensor");
                double max_diff = 0.0;
                double scale = 0.0;
                for (std::size_t i = 0; i < t.size(); ++i) {
                    max_diff = std::max(max_diff, std::abs(double(t.values()[i]) - expected.values()[i]));
                    scale = std::max(scale, std::abs(double(expected.values()[i])));
                }
                check.error = max_diff == 0.0 ? 0.0 : max_diff / std::max(scale, 1e-12);
            } else {
                const json expected = entry.at("expected_components");
                const json computed = components_json(got.components.value());
                for (const auto& [key, value] : expected.items()) {
                    check.error = std::max(check.error, scalar_error(computed.at(key).get<double>(), value.get<double>()));
                }
            }
            check.ok = check.error <= tolerance;
            if (!check.ok) check.message = "relative error " + std::to_string(check.error);
        } catch (const std::exception& e) {
            check.ok = false;
            check.message = e.what();
        }
        checks.push_back(std::move(check));
    }
    return checks;
}

losses::LossInputs load_loss_inputs(const fs::path& dir) {
    using F = LossEvalFiles;
    return {load_tensor(dir / F::clean),
            load_tensor(dir / F::clean_cycled),
            load_tensor(dir / F::stripy),
            load_tensor(dir / F::stripy_cycled),
            load_tensor(dir / F::clean_hat),
            load_tensor(dir / F::clean_identity),
            {load_tensor(dir / F::d_real), load_tensor(dir / F::d_fake_hat_s), load_tensor(dir / F::d_fake_s)}};
}

losses::LossComponents cmd_loss_eval(const fs::path& inputs_dir, const RunConfig& cfg) {
    cfg.validate();
    const auto inputs = load_loss_inputs(inputs_dir);
    return losses::evaluate_losses(inputs, cfg.weights, cfg.hbgm_levels, *losses::make_extractor(cfg.extractor));
}

std::string to_json(const losses::LossComponents& c) {
    const std::pair<const char*, double> fields[] = {{"cyc_c", c.cyc_c}, {"cyc_s", c.cyc_s},   {"l_h", c.l_h},
                                                     {"l_perc", c.l_perc}, {"l_iden", c.l_iden}, {"l_adv", c.l_adv},
                                                     {"l_cross", c.l_cross}, {"l_total", c.l_total}};
    std::string out = "{";
    for (std::size_t i = 0; i < std::size(fields); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s\"%s\": %.6g", i ? ", " : "", fields[i].first, fields[i].second);
        out += buf;
    }
    return out + "}";
}

}  // namespace destripe::harness
