#include "qconv/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "qconv/errors.hpp"

namespace qconv {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["config_hash"] = config_hash;
    j["seeds"] = seeds;
    j["files"] = files;
    j["wall_seconds"] = wall_seconds;
    j["checks_passed"] = checks_passed;
    j["notes"] = notes;
    return j;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << to_json().dump(2) << '\n';
}

} // namespace qconv
