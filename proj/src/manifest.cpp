#include "earlyguard/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "earlyguard/errors.hpp"
#include "earlyguard/rng.hpp"

namespace earlyguard {

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path.string() + "' for digest");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    nlohmann::json j{
        {"tool", "earlyguard"},
        {"tool_version", std::string(kToolVersion)},
        {"command", m.command},
        {"argv", m.argv},
        {"seed", m.seed},
        {"jobs", m.jobs},
        {"started_utc", m.started_utc},
        {"finished_utc", m.finished_utc},
        {"wall_seconds", m.wall_seconds},
    };
    auto inputs = nlohmann::json::object();
    for (const auto& [p, d] : m.input_digests) inputs[p] = d;
    auto outputs = nlohmann::json::object();
    for (const auto& [p, d] : m.output_digests) outputs[p] = d;
    j["inputs"] = std::move(inputs);
    j["outputs"] = std::move(outputs);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write manifest '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace earlyguard
