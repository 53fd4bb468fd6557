#ifndef BNMC_TOOLS_ARTIFACTS_HPP
#define BNMC_TOOLS_ARTIFACTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace bnmc::cli {

// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string utc_timestamp();

/// Provenance record written next to every output as <out>.manifest.json.
class Manifest {
public:
    Manifest(std::string command, int argc, char** argv);

    void flag(const std::string& name, nlohmann::ordered_json value) { flags_[name] = std::move(value); }
    void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
    void input(const std::filesystem::path& path);

    // Writes the artifact atomically, then its manifest.
    void emit(const std::filesystem::path& out, const std::string& content);

private:
    std::string command_;
    std::vector<std::string> argv_;
    std::string started_;
    nlohmann::ordered_json flags_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json seeds_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
};

}  // namespace bnmc::cli

#endif  // BNMC_TOOLS_ARTIFACTS_HPP
