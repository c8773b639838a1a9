#include "destripe/error.hpp"
#include "destripe/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace destripe::harness {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::Config, key + ": expected a number, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw Error(ErrorCode::Config, key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw Error(ErrorCode::Config, key + ": expected a boolean, got '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second) throw Error(ErrorCode::Config, "duplicate key '" + key + "'");
    }
    return kv;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Unreadable, path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"input_dir", [&](auto&, auto& v) { input_dir = v; }},
        {"output_dir", [&](auto&, auto& v) { output_dir = v; }},
        {"distribution", [&](auto&, auto& v) { sgm.distribution = sgm::parse_distribution(v); }},
        {"intensity_min", [&](auto& k, auto& v) { sgm.intensity_min = to_double(k, v); }},
        {"intensity_max", [&](auto& k, auto& v) { sgm.intensity_max = to_double(k, v); }},
        {"clamp_output", [&](auto& k, auto& v) { sgm.clamp_output = to_bool(k, v); }},
        {"seed", [&](auto& k, auto& v) { sgm.seed = to_u64(k, v); }},
        {"patches", [&](auto& k, auto& v) { use_patches = to_bool(k, v); }},
        {"patch_size", [&](auto& k, auto& v) { patch.size = to_u64(k, v); }},
        {"patch_stride", [&](auto& k, auto& v) { patch.stride = to_u64(k, v); }},
        {"rotate90", [&](auto& k, auto& v) { patch.rotate90 = to_bool(k, v); }},
        {"scale2x", [&](auto& k, auto& v) { patch.scale2x = to_bool(k, v); }},
        {"hbgm_levels", [&](auto& k, auto& v) { hbgm_levels = to_u64(k, v); }},
        {"alpha", [&](auto& k, auto& v) { weights.alpha = to_double(k, v); }},
        {"lambda1", [&](auto& k, auto& v) { weights.lambda1 = to_double(k, v); }},
        {"lambda2", [&](auto& k, auto& v) { weights.lambda2 = to_double(k, v); }},
        {"lambda3", [&](auto& k, auto& v) { weights.lambda3 = to_double(k, v); }},
        {"lambda4", [&](auto& k, auto& v) { weights.lambda4 = to_double(k, v); }},
        {"lambda5", [&](auto& k, auto& v) { weights.lambda5 = to_double(k, v); }},
        {"k", [&](auto& k, auto& v) { weights.k = to_double(k, v); }},
        {"extractor", [&](auto&, auto& v) { extractor = v; }},
        {"bitdepth", [&](auto& k, auto& v) { bitdepth = static_cast<int>(to_u64(k, v)); }},
        {"threads", [&](auto& k, auto& v) { threads = static_cast<unsigned>(to_u64(k, v)); }},
        {"dump_fields", [&](auto& k, auto& v) { dump_fields = to_bool(k, v); }},
    };
    for (const auto& [key, value] : kv) {
        auto it = setters.find(key);
        if (it == setters.end()) throw Error(ErrorCode::Config, "unknown key '" + key + "'");
        it->second(key, value);
    }
}

void RunConfig::validate() const {
    sgm.validate();
    weights.validate();
    if (use_patches) patch.validate();
    if (hbgm_levels < 1 || hbgm_levels > 16) throw Error(ErrorCode::Config, "hbgm_levels must be in [1,16]");
    if (bitdepth != 8 && bitdepth != 16) throw Error(ErrorCode::Config, "bitdepth must be 8 or 16");
    if (threads < 1) throw Error(ErrorCode::Config, "threads must be >= 1");
    if (extractor != "identity" && extractor != "convstack") {
        throw Error(ErrorCode::Config, "extractor must be identity or convstack");
    }
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Unreadable, dir.string() + ": not a directory");
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    return out;
}

}  // namespace destripe::harness
