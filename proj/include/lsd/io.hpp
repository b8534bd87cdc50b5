#pragma once

#include "lsd/common.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace lsd {

inline constexpr const char* kToolVersion = "0.3.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// run_manifest.json in a run directory. Re-opening an existing directory merges into its manifest.
class RunManifest {
public:
    explicit RunManifest(std::filesystem::path run_dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path_for(const std::string& name) const { return dir_ / name; }

    void set_scenario(const std::string& hash, const nlohmann::json& scenario);
    void set_constants(const nlohmann::json& constants);
    // Hashes the file (relative to the run directory) and records it under the given stage.
    void add_file(const std::string& name, const std::string& stage);
    void stage(const std::string& name, const std::string& status, double seconds, const nlohmann::json& extra = {});
    void save() const;

    const nlohmann::json& json() const { return j_; }

    // Re-hashes every recorded file; returns the names that no longer verify.
    static std::vector<std::string> verify(const std::filesystem::path& run_dir);

private:
    std::filesystem::path dir_;
    nlohmann::json j_;
};

}  // namespace lsd
