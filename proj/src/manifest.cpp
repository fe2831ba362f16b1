#include "rydsim/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "rydsim/errors.hpp"

namespace rydsim {

std::string config_hash(const nlohmann::json& config) {
    // nlohmann::json objects are key-sorted, so dump() is canonical.
    const std::string canonical = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = outputs;
    if (!preset.empty())
        j["preset"] = preset;
    return j;
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest_atomic(const std::string& path, const RunManifest& manifest) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw IoError("cannot write '" + tmp + "'");
        out << manifest.to_json().dump(2) << "\n";
        if (!out)
            throw IoError("failed while writing '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

} // namespace rydsim
