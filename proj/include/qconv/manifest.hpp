#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qconv {

// FNV-1a over the raw bytes; identifies the exact config a run used.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

struct RunManifest {
    std::string tool_version;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> files;   // everything the run wrote, this file excluded
    std::vector<double> wall_seconds; // per seed/run, aligned with `seeds`
    bool checks_passed = true;
    std::vector<std::string> notes;   // per-run failures, non-fatal warnings

    nlohmann::json to_json() const;
    void save(const std::string& path) const;
};

} // namespace qconv
