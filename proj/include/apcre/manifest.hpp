#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace apcre {

// Every artifact-writing command drops a manifest.json next to its outputs
// recording what produced them. Rerunning a command from its manifest must
// reproduce the data payloads byte for byte; only the timestamps differ.
struct RunManifest {
    std::string command;
    std::string version;
    nlohmann::json parameters;         // effective values after defaults
    std::vector<std::string> outputs;  // payload file names within the out dir
    std::string started_at;            // UTC, second resolution
    std::string finished_at;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

std::string utc_timestamp();

void write_manifest(const RunManifest& manifest, const std::string& out_dir);
RunManifest read_manifest(const std::string& path);

}  // namespace apcre
