#include "destripe/error.hpp"
#include "destripe/harness.hpp"
#include "destripe/parallel.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace destripe::harness {

namespace {

struct WorkItem {
    std::string name;
    ImageTensor clean;
};

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Unwritable, dir.string());
}

}  // namespace

std::vector<SimulatedItem> cmd_simulate(const RunConfig& cfg) {
    cfg.validate();
    const auto inputs = list_images(cfg.input_dir);
    if (inputs.empty()) throw Error(ErrorCode::InvalidArgument, cfg.input_dir.string() + ": no .png/.pgm images");
    ensure_directory(cfg.output_dir);

    std::vector<WorkItem> work;
    std::set<std::string> stems;
    for (const auto& path : inputs) {
        const std::string stem = path.stem().string();
        if (!stems.insert(stem).second) throw Error(ErrorCode::InvalidArgument, "duplicate image name '" + stem + "'");
        ImageTensor img = load_image(path);
        if (!cfg.use_patches) {
            work.push_back({stem, std::move(img)});
            continue;
        }
        const ImageTensor patches = extract_patches(img, cfg.patch);
        for (std::size_t p = 0; p < patches.batch(); ++p) {
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_p%04zu", p);
            work.push_back({stem + suffix, patches.item(p)});
        }
    }

    std::vector<SimulatedItem> items(work.size());
    parallel_for(work.size(), cfg.threads, [&](std::size_t i) {
        const auto& w = work[i];
        const auto fields = sgm::sample_stripe_set(cfg.sgm, w.clean.height(), w.clean.width(), i);
        const ImageTensor stripy = sgm::apply_sgm(w.clean, fields, cfg.sgm.clamp_output);
        save_image(w.clean, cfg.output_dir / (w.name + "_clean.png"), cfg.bitdepth);
        save_image(stripy, cfg.output_dir / (w.name + "_stripy.png"), cfg.bitdepth);
        if (cfg.dump_fields) {
            for (const auto& f : fields) {
                save_tensor(f.matrix(), cfg.output_dir / (w.name + "_A" + std::to_string(f.order) + ".dstv"));
            }
        }
        items[i].name = w.name;
        for (std::size_t m = 0; m < fields.size(); ++m) items[i].intensities[m] = fields[m].intensity;
    });

    const fs::path manifest = cfg.output_dir / "manifest.csv";
    std::ofstream out(manifest, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Unwritable, manifest.string());
    out << "name,intensity_a0,intensity_a1,intensity_a2,intensity_a3\n";
    for (const auto& item : items) {
        out << item.name;
        for (double v : item.intensities) {
            char buf[48];
            std::snprintf(buf, sizeof buf, ",%.9f", v);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::Unwritable, manifest.string());
    return items;
}

}  // namespace destripe::harness
