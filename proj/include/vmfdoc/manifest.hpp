#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace vmfdoc {

// Provenance record written next to every command's primary output.
struct RunManifest {
    std::string command;
    nlohmann::ordered_json config;
    std::vector<std::pair<std::string, std::string>> input_digests;  // path, hex digest
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::string tool_version;

    nlohmann::ordered_json to_json() const;
};

// Content hash of a file, as 16 lowercase hex digits.
std::string file_digest_hex(const std::filesystem::path& path);

std::string fingerprint_hex(std::uint64_t fingerprint);

// Writes via a temporary in the same directory plus an atomic rename, so a
// failed run never leaves a partial file behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace vmfdoc
