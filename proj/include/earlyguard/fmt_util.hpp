#pragma once

#include <charconv>
#include <string>

namespace earlyguard {

/// Shortest round-trip decimal form of a double; locale-free, so emitted
/// files are byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace earlyguard
