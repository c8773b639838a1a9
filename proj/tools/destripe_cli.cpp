// Command-line front end: simulate, metrics, curves, hbgm, loss-eval, export-vectors.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include "destripe/error.hpp"
#include "destripe/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace fs = std::filesystem;
namespace h = destripe::harness;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Flag values collected as strings and layered over the --config file.
struct Overrides {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void add(CLI::App* app, const std::string& names, const std::string& key, const std::string& help) {
        options[key] = app->add_option(names, values[key], help);
    }
    void flag(CLI::App* app, const std::string& names, const std::string& key, const std::string& help) {
        options[key] = app->add_flag_callback(names, [this, key] { values[key] = "true"; }, help);
    }

    h::RunConfig build(const std::string& config_path) const {
        h::RunConfig cfg;
        if (!config_path.empty()) cfg.apply(h::read_key_values(config_path));
        std::map<std::string, std::string> given;
        for (const auto& [key, opt] : options) {
            if (opt->count() > 0) given[key] = values.at(key);
        }
        cfg.apply(given);
        cfg.validate();
        return cfg;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    out << text;
    if (!out) throw destripe::Error(destripe::ErrorCode::Unwritable, path);
}

int report_errors(const std::vector<std::string>& errors) {
    for (const auto& e : errors) std::cerr << "error: " << e << '\n';
    return errors.empty() ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stripe-noise simulation, Haar background filtering and destriping loss/metric toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Synthesize clean/stripy pairs from an image folder");
    std::string sim_config;
    Overrides sim;
    simulate->add_option("--config", sim_config, "key=value config file (flags override it)");
    sim.add(simulate, "-i,--input", "input_dir", "Directory of clean .png/.pgm images");
    sim.add(simulate, "-o,--output", "output_dir", "Output directory");
    sim.add(simulate, "--distribution", "distribution", "gaussian | uniform");
    sim.add(simulate, "--intensity-min,--sigma-min,--mu-min", "intensity_min", "Lower intensity bound (default 0.02)");
    sim.add(simulate, "--intensity-max,--sigma-max,--mu-max", "intensity_max", "Upper intensity bound (default 0.12)");
    sim.add(simulate, "--clamp", "clamp_output", "Clamp stripy output to [0,1] (default true)");
    sim.add(simulate, "--seed", "seed", "RNG seed (default 0)");
    sim.flag(simulate, "--patches", "patches", "Tile images into patches before simulation");
    sim.add(simulate, "--patch-size", "patch_size", "Patch side (default 64)");
    sim.add(simulate, "--patch-stride", "patch_stride", "Patch stride (default 64)");
    sim.flag(simulate, "--rotate90", "rotate90", "Also emit 90-degree rotated patches");
    sim.flag(simulate, "--scale2x", "scale2x", "Also emit 2x zoomed patches");
    sim.add(simulate, "--bitdepth", "bitdepth", "PNG bit depth, 8 or 16");
    sim.add(simulate, "--threads", "threads", "Worker threads");
    sim.flag(simulate, "--dump-fields", "dump_fields", "Write A0..A3 stripe fields as DSTV");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "PSNR/SSIM/MS-SSIM report of test images against references");
    std::string m_ref, m_test, m_out;
    h::PairingOptions m_pair;
    metrics->add_option("--ref", m_ref, "Reference directory")->required();
    metrics->add_option("--test", m_test, "Test directory")->required();
    metrics->add_option("--ref-suffix", m_pair.ref_suffix, "Suffix stripped from reference names (e.g. _clean)");
    metrics->add_option("--test-suffix", m_pair.test_suffix, "Suffix stripped from test names (e.g. _stripy)");
    metrics->add_option("--threads", m_pair.threads, "Worker threads");
    metrics->add_option("-o,--out", m_out, "CSV output path (default stdout)");

    // curves
    auto* curves = app.add_subcommand("curves", "Per-image PSNR table, one column per test directory");
    std::string c_ref, c_out;
    std::vector<std::string> c_tests;
    h::PairingOptions c_pair;
    curves->add_option("--ref", c_ref, "Reference directory")->required();
    curves->add_option("--test", c_tests, "Test directories, in column order")->required();
    curves->add_option("--ref-suffix", c_pair.ref_suffix, "Suffix stripped from reference names");
    curves->add_option("--test-suffix", c_pair.test_suffix, "Suffix stripped from test names");
    curves->add_option("--threads", c_pair.threads, "Worker threads");
    curves->add_option("-o,--out", c_out, "CSV output path (default stdout)");

    // hbgm
    auto* hbgm = app.add_subcommand("hbgm", "Haar background guidance filter of one image");
    std::string hb_in, hb_out, hb_raw, hb_dump_dir;
    bool hb_dump = false;
    std::size_t hb_levels = 3;
    hbgm->add_option("-i,--input", hb_in, "Input image")->required();
    hbgm->add_option("-o,--output", hb_out, "Output PNG/PGM (display-mapped)")->required();
    hbgm->add_option("--levels", hb_levels, "Haar levels (default 3)");
    hbgm->add_flag("--dump-subbands", hb_dump, "Write every subband as DSTV");
    hbgm->add_option("--subband-dir", hb_dump_dir, "Subband directory (default <output stem>_subbands)");
    hbgm->add_option("--raw", hb_raw, "Write the filtered tensor before display mapping as DSTV");

    // loss-eval
    auto* loss_eval = app.add_subcommand("loss-eval", "Evaluate every training loss on DSTV tensors");
    std::string le_inputs, le_config;
    loss_eval->add_option("--inputs", le_inputs, "Directory with C, C_tilde, S, S_tilde, C_hat, G_C, d_* tensors")
        ->required();
    loss_eval->add_option("--config", le_config, "key=value: alpha, lambda1..lambda5, k, hbgm_levels, extractor");

    // export-vectors
    auto* exportv = app.add_subcommand("export-vectors", "Write or verify a golden test-vector bundle");
    std::string ev_out, ev_verify;
    std::uint64_t ev_seed = 0;
    bool ev_check = false;
    exportv->add_option("-o,--out", ev_out, "Bundle directory to write");
    exportv->add_option("--seed", ev_seed, "Seed (default 0)");
    exportv->add_flag("--self-check", ev_check, "Re-verify the bundle after writing");
    exportv->add_option("--verify", ev_verify, "Verify an existing bundle instead of writing one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            const h::RunConfig cfg = sim.build(sim_config);
            if (cfg.input_dir.empty() || cfg.output_dir.empty()) {
                std::cerr << "simulate: --input and --output (or config input_dir/output_dir) are required\n";
                return kExitUsage;
            }
            const auto items = h::cmd_simulate(cfg);
            std::cerr << "wrote " << items.size() << " pairs to " << cfg.output_dir.string() << '\n';
            return 0;
        }
        if (metrics->parsed()) {
            const auto result = h::cmd_metrics_report(m_ref, m_test, m_pair);
            write_text(m_out, result.report.to_csv());
            return report_errors(result.errors);
        }
        if (curves->parsed()) {
            std::vector<fs::path> dirs(c_tests.begin(), c_tests.end());
            const auto result = h::cmd_psnr_curves(c_ref, dirs, c_pair);
            write_text(c_out, result.csv);
            return report_errors(result.errors);
        }
        if (hbgm->parsed()) {
            h::HbgmOptions opts;
            opts.levels = hb_levels;
            if (hb_dump) {
                const fs::path out(hb_out);
                opts.subband_dir = hb_dump_dir.empty() ? out.parent_path() / (out.stem().string() + "_subbands")
                                                       : fs::path(hb_dump_dir);
            }
            if (!hb_raw.empty()) opts.raw_output = hb_raw;
            const auto result = h::cmd_hbgm_filter(hb_in, hb_out, opts);
            if (opts.subband_dir) {
                std::cerr << "wrote " << result.subband_files.size() << " subbands to " << opts.subband_dir->string()
                          << '\n';
            }
            return 0;
        }
        if (loss_eval->parsed()) {
            h::RunConfig cfg;
            if (!le_config.empty()) cfg.apply(h::read_key_values(le_config));
            std::cout << h::to_json(h::cmd_loss_eval(le_inputs, cfg)) << '\n';
            return 0;
        }
        if (exportv->parsed()) {
            if (ev_out.empty() == ev_verify.empty()) {
                std::cerr << "export-vectors: give exactly one of --out or --verify\n";
                return kExitUsage;
            }
            fs::path dir = ev_verify.empty() ? fs::path(ev_out) : fs::path(ev_verify);
            if (!ev_out.empty()) {
                const auto n = h::cmd_export_vectors(dir, ev_seed);
                std::cerr << "exported " << n << " entries to " << dir.string() << '\n';
                if (!ev_check) return 0;
            }
            const auto checks = h::verify_vectors(dir);
            std::size_t failed = 0;
            for (const auto& c : checks) {
                std::cout << (c.ok ? "PASS " : "FAIL ") << c.name;
                if (!c.ok) std::cout << "  " << c.message;
                std::cout << '\n';
                if (!c.ok) ++failed;
            }
            std::cout << (checks.size() - failed) << "/" << checks.size() << " entries verified\n";
            return failed == 0 ? 0 : kExitData;
        }
    } catch (const destripe::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == destripe::ErrorCode::Config ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
