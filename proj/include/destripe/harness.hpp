#pragma once

#include "destripe/image.hpp"
#include "destripe/losses.hpp"
#include "destripe/metrics.hpp"
#include "destripe/sgm.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace destripe::harness {

namespace fs = std::filesystem;

/// `key = value` lines; blank lines and `#` comments ignored. Duplicate keys
/// and malformed lines are errors.
std::map<std::string, std::string> read_key_values(const fs::path& path);
std::map<std::string, std::string> parse_key_values(const std::string& text);

struct RunConfig {
    fs::path input_dir;
    fs::path output_dir;
    sgm::SgmConfig sgm;
    bool use_patches = false;
    PatchSpec patch;
    std::size_t hbgm_levels = 3;
    losses::LossWeights weights;
    std::string extractor = "identity";
    int bitdepth = 8;
    unsigned threads = 1;
    bool dump_fields = false;

    std::uint64_t seed() const noexcept { return sgm.seed; }

    /// Applies recognised keys; any unknown key is a Config error.
    void apply(const std::map<std::string, std::string>& kv);
    void validate() const;
};

/// Image files (.png/.pgm) in `dir`, sorted by filename.
std::vector<fs::path> list_images(const fs::path& dir);

// ---------------------------------------------------------------------------
// simulate

struct SimulatedItem {
    std::string name;
    std::array<double, sgm::kFieldCount> intensities{};
};

/// Writes <name>_clean.png / <name>_stripy.png pairs and manifest.csv.
/// Images (or patches, when enabled) are numbered in sorted order and item i
/// draws its stripes from SGM stream index i.
std::vector<SimulatedItem> cmd_simulate(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// metrics / curves

struct PairingOptions {
    std::string ref_suffix;   ///< when set, only reference stems ending in it are used (suffix stripped)
    std::string test_suffix;  ///< when set, only test stems ending in it are used (suffix stripped)
    unsigned threads = 1;
};

struct MetricsResult {
    metrics::MetricsReport report;
    std::vector<std::string> errors;  ///< one line per unmatched or mismatched file
};

MetricsResult cmd_metrics_report(const fs::path& ref_dir, const fs::path& test_dir, const PairingOptions& opts = {});

struct CurvesResult {
    std::string csv;
    std::vector<std::string> errors;
};

/// One row per reference image, one PSNR column per test dir (argument order).
CurvesResult cmd_psnr_curves(const fs::path& ref_dir, const std::vector<fs::path>& test_dirs,
                             const PairingOptions& opts = {});

// ---------------------------------------------------------------------------
// hbgm

struct HbgmResult {
    ImageTensor filtered;  ///< HBGM output before display mapping
    std::size_t crop_top = 0;
    std::size_t crop_left = 0;
    std::size_t height = 0;  ///< size after cropping
    std::size_t width = 0;
    bool cropped = false;
    std::vector<fs::path> subband_files;
};

/// Largest centred crop whose dims divide by 2^levels.
ImageTensor center_crop_divisible(const ImageTensor& x, std::size_t levels, std::size_t* top = nullptr,
                                  std::size_t* left = nullptr);

/// Affine min/max map to [0,1]; a flat tensor maps to 0.5.
ImageTensor display_map(const ImageTensor& x);

struct HbgmOptions {
    std::size_t levels = 3;
    std::optional<fs::path> subband_dir;  ///< write A_L, H*, V*, D* as DSTV here
    std::optional<fs::path> raw_output;   ///< write the pre-display tensor as DSTV
};

/// `input` is a .png/.pgm image or a single-image .dstv tensor.
HbgmResult cmd_hbgm_filter(const fs::path& input, const fs::path& output, const HbgmOptions& opts);

// ---------------------------------------------------------------------------
// golden test vectors

inline constexpr int kBundleVersion = 1;
inline constexpr double kBundleTolerance = 1e-6;

/// Conventional tensor names read by loss-eval from its input directory.
struct LossEvalFiles {
    static constexpr const char* clean = "C.dstv";
    static constexpr const char* clean_cycled = "C_tilde.dstv";
    static constexpr const char* stripy = "S.dstv";
    static constexpr const char* stripy_cycled = "S_tilde.dstv";
    static constexpr const char* clean_hat = "C_hat.dstv";
    static constexpr const char* clean_identity = "G_C.dstv";
    static constexpr const char* d_real = "d_real.dstv";
    static constexpr const char* d_fake_hat_s = "d_fake_hat_s.dstv";
    static constexpr const char* d_fake_s = "d_fake_s.dstv";
};

losses::LossInputs load_loss_inputs(const fs::path& dir);
losses::LossComponents cmd_loss_eval(const fs::path& inputs_dir, const RunConfig& cfg);
/// {"cyc_c":..., ..., "l_total":...} with 6 significant digits.
std::string to_json(const losses::LossComponents& c);

/// Writes manifest.json plus DSTV inputs/expectations into out_dir.
/// Returns the number of entries.
std::size_t cmd_export_vectors(const fs::path& out_dir, std::uint64_t seed);

struct EntryCheck {
    std::string name;
    bool ok = false;
    double error = 0.0;  ///< relative error (scalars) or scaled max-abs (tensors)
    std::string message;
};

/// Re-evaluates every manifest entry and checks the file listing.
std::vector<EntryCheck> verify_vectors(const fs::path& bundle_dir, double tolerance = kBundleTolerance);

}  // namespace destripe::harness
