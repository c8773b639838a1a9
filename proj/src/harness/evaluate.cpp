#include "destripe/error.hpp"
#include "destripe/harness.hpp"
#include "destripe/parallel.hpp"

#include <map>
#include <optional>

namespace destripe::harness {

namespace {

/// Stem with `suffix` removed; files lacking a non-empty suffix are skipped so
/// that one directory can hold both sides of a simulated pair.
std::optional<std::string> pairing_key(const fs::path& p, const std::string& suffix) {
    std::string stem = p.stem().string();
    if (suffix.empty()) return stem;
    if (stem.size() <= suffix.size() || stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) != 0) {
        return std::nullopt;
    }
    stem.erase(stem.size() - suffix.size());
    return stem;
}

std::map<std::string, fs::path> index_dir(const fs::path& dir, const std::string& suffix,
                                          std::vector<std::string>& errors) {
    std::map<std::string, fs::path> out;
    for (const auto& p : list_images(dir)) {
        const auto key = pairing_key(p, suffix);
        if (!key) continue;
        if (!out.emplace(*key, p).second) errors.push_back(p.string() + ": duplicate name '" + *key + "'");
    }
    return out;
}

}  // namespace

MetricsResult cmd_metrics_report(const fs::path& ref_dir, const fs::path& test_dir, const PairingOptions& opts) {
    MetricsResult result;
    const auto refs = index_dir(ref_dir, opts.ref_suffix, result.errors);
    const auto tests = index_dir(test_dir, opts.test_suffix, result.errors);

    std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
    for (const auto& [name, path] : refs) {
        auto it = tests.find(name);
        if (it == tests.end()) {
            result.errors.push_back(name + ": missing from " + test_dir.string());
        } else {
            pairs.push_back({name, {path, it->second}});
        }
    }
    for (const auto& [name, path] : tests) {
        if (!refs.count(name)) result.errors.push_back(name + ": missing from " + ref_dir.string());
    }

    std::vector<std::optional<metrics::MetricsRow>> rows(pairs.size());
    std::vector<std::string> row_errors(pairs.size());
    parallel_for(pairs.size(), opts.threads, [&](std::size_t i) {
        const auto& [name, paths] = pairs[i];
        try {
            const ImageTensor ref = load_image(paths.first);
            const ImageTensor test = load_image(paths.second);
            if (!ref.same_shape(test)) {
                row_errors[i] = name + ": dimension mismatch " + std::to_string(ref.height()) + "x" +
                                std::to_string(ref.width()) + " vs " + std::to_string(test.height()) + "x" +
                                std::to_string(test.width());
                return;
            }
            rows[i] = metrics::evaluate_pair(name, ref, test);
        } catch (const Error& e) {
            row_errors[i] = name + ": " + e.what();
        }
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (rows[i]) result.report.rows.push_back(*rows[i]);
        if (!row_errors[i].empty()) result.errors.push_back(row_errors[i]);
    }
    return result;
}

CurvesResult cmd_psnr_curves(const fs::path& ref_dir, const std::vector<fs::path>& test_dirs,
                             const PairingOptions& opts) {
    CurvesResult result;
    if (test_dirs.empty()) throw Error(ErrorCode::InvalidArgument, "curves needs at least one test dir");
    const auto refs = index_dir(ref_dir, opts.ref_suffix, result.errors);
    std::vector<std::map<std::string, fs::path>> tests;
    for (const auto& d : test_dirs) tests.push_back(index_dir(d, opts.test_suffix, result.errors));

    std::vector<std::string> names;
    for (const auto& [name, _] : refs) names.push_back(name);
    std::vector<std::vector<std::string>> cells(names.size(), std::vector<std::string>(test_dirs.size()));
    std::vector<std::string> row_errors(names.size());

    parallel_for(names.size(), opts.threads, [&](std::size_t i) {
        const std::string& name = names[i];
        try {
            const ImageTensor ref = load_image(refs.at(name));
            for (std::size_t d = 0; d < test_dirs.size(); ++d) {
                auto it = tests[d].find(name);
                if (it == tests[d].end()) {
                    row_errors[i] += name + ": missing from " + test_dirs[d].string() + "; ";
                    continue;
                }
                const ImageTensor test = load_image(it->second);
                if (!ref.same_shape(test)) {
                    row_errors[i] += name + ": dimension mismatch in " + test_dirs[d].string() + "; ";
                    continue;
                }
                cells[i][d] = metrics::format_value(metrics::psnr(ref, test));
            }
        } catch (const Error& e) {
            row_errors[i] += name + ": " + e.what();
        }
    });

    result.csv = "name";
    for (const auto& d : test_dirs) {
        std::string label = d.filename().string();
        if (label.empty()) label = d.parent_path().filename().string();
        result.csv += "," + label;
    }
    result.csv += "\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!row_errors[i].empty()) {
            result.errors.push_back(row_errors[i]);
            continue;
        }
        result.csv += names[i];
        for (const auto& c : cells[i]) result.csv += "," + c;
        result.csv += "\n";
    }
    for (std::size_t d = 0; d < tests.size(); ++d) {
        for (const auto& [name, _] : tests[d]) {
            if (!refs.count(name)) result.errors.push_back(name + ": missing from " + ref_dir.string());
        }
    }
    return result;
}

}  // namespace destripe::harness
