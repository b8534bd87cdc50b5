#include "lsd/io.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace lsd {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::IoError, "SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(bool(f), ErrorKind::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return sha256_hex(ss.str());
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    require(bool(f), ErrorKind::IoError, "cannot write " + path.string());
    f << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
    std::ifstream f(path);
    require(bool(f), ErrorKind::IoError, "cannot read " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::IoError, path.string() + ": " + e.what());
    }
}

RunManifest::RunManifest(fs::path run_dir) : dir_(std::move(run_dir)) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / "run_manifest.json";
    if (fs::exists(p))
        j_ = read_json(p);
    else
        j_ = {{"tool_version", kToolVersion}, {"files", nlohmann::json::object()}, {"stages", nlohmann::json::object()}};
}

void RunManifest::set_scenario(const std::string& hash, const nlohmann::json& scenario) {
    j_["scenario_hash"] = hash;
    j_["scenario"] = scenario;
    j_["tool_version"] = kToolVersion;
}

void RunManifest::set_constants(const nlohmann::json& constants) { j_["constants"] = constants; }

void RunManifest::add_file(const std::string& name, const std::string& stage) {
    const fs::path p = dir_ / name;
    j_["files"][name] = {{"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}, {"stage", stage}};
}

void RunManifest::stage(const std::string& name, const std::string& status, double seconds, const nlohmann::json& extra) {
    nlohmann::json s = {{"status", status}, {"seconds", seconds}};
    if (!extra.is_null()) s["details"] = extra;
    j_["stages"][name] = s;
}

void RunManifest::save() const { write_json(dir_ / "run_manifest.json", j_); }

std::vector<std::string> RunManifest::verify(const fs::path& run_dir) {
    const auto j = read_json(run_dir / "run_manifest.json");
    std::vector<std::string> bad;
    for (const auto& [name, rec] : j.at("files").items()) {
        const fs::path p = run_dir / name;
        if (!fs::exists(p) || sha256_file(p) != rec.at("sha256").get<std::string>()) bad.push_back(name);
    }
    return bad;
}

}  // namespace lsd
