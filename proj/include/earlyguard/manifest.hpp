#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace earlyguard {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Record of one CLI run, written next to its outputs: the full command,
/// seeds, input digests and output names are enough to replay the run and
/// check that the primary outputs came back byte-identical. Timestamps and
/// timings live here and only here, so primary outputs stay deterministic.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = library default
    std::vector<std::pair<std::string, std::string>> input_digests;   // path -> fnv1a64:<hex>
    std::vector<std::pair<std::string, std::string>> output_digests;  // path -> fnv1a64:<hex>
    std::string started_utc;
    std::string finished_utc;
    double wall_seconds = 0.0;
};

/// FNV-1a 64 digest of a file's bytes, rendered as "fnv1a64:<16 hex digits>".
std::string file_digest(const std::filesystem::path& path);

void write_manifest(const RunManifest& m, const std::filesystem::path& path);

}  // namespace earlyguard
