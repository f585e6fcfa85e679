#pragma once

#include <chrono>
#include <cinttypes>
#include <cstdio>

#include <json.hpp>

#include "nesy/core.hpp"

namespace nesy {

/** Reproducibility record emitted (on stderr) next to every command's output:
 *  tool version, input hashes, and every resolved option. Two runs on the same
 *  inputs produce identical manifests except for the timestamp. */
struct RunManifest {
    std::string command;
    std::vector<std::string> input_hashes;
    nlohmann::json options = nlohmann::json::object();

    nlohmann::json to_json(bool with_timestamp = true) const {
        nlohmann::json j;
        j["tool"] = "nesy";
        j["version"] = kVersion;
        j["command"] = command;
        j["inputs"] = input_hashes;
        j["options"] = options;
        if (with_timestamp) {
            const auto now = std::chrono::system_clock::now();
            j["timestamp_unix_ms"] =
                std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
                    .count();
        }
        return j;
    }
};

inline std::string content_hash(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, fnv1a64(bytes));
    return buf;
}

} // namespace nesy
