#include "vmfdoc/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "vmfdoc/errors.hpp"
#include "vmfdoc/rng.hpp"

namespace vmfdoc {

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto& [path, digest] : input_digests) inputs[path] = digest;
    j["inputs"] = inputs;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    j["tool_version"] = tool_version;
    return j;
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint));
    return buf;
}

std::string file_digest_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::uint64_t h = fnv1a64(nullptr, 0);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return fingerprint_hex(h);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    atomic_write_file(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace vmfdoc
