#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace earlyguard {

/// Parses an ISO-8601 UTC timestamp to Unix epoch seconds.
/// Accepted forms: YYYY-MM-DD, YYYY-MM-DDTHH:MMZ, YYYY-MM-DDTHH:MM:SSZ.
/// Throws ValidationError on anything else.
std::int64_t parse_iso8601_utc(std::string_view s);

/// Canonical form: YYYY-MM-DDTHH:MM:SSZ.
std::string format_iso8601_utc(std::int64_t epoch_seconds);

}  // namespace earlyguard
