#include "apcre/manifest.hpp"

#include <ctime>

#include "apcre/io_util.hpp"

namespace apcre {

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{
        {"command", command},       {"version", version},
        {"parameters", parameters}, {"outputs", outputs},
        {"started_at", started_at}, {"finished_at", finished_at},
    };
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.version = j.value("version", std::string());
    m.parameters = j.at("parameters");
    m.outputs = j.value("outputs", std::vector<std::string>());
    m.started_at = j.value("started_at", std::string());
    m.finished_at = j.value("finished_at", std::string());
    return m;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& out_dir) {
    atomic_write_file(out_dir + "/manifest.json", manifest.to_json().dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
        return RunManifest::from_json(j);
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError("manifest " + path + ": " + e.what());
    }
}

}  // namespace apcre
