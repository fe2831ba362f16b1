#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace rydsim {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit digest of the canonical (sorted-key) JSON dump; stable under
/// key reordering of the input document.
std::string config_hash(const nlohmann::json& config);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
    std::string preset;

    nlohmann::json to_json() const;
};

std::string iso8601_now();

/// Writes to a temporary file in the same directory and renames into place.
void write_manifest_atomic(const std::string& path, const RunManifest& manifest);

} // namespace rydsim
