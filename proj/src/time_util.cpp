#include "earlyguard/time_util.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "earlyguard/errors.hpp"

namespace earlyguard {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr std::array<unsigned, 12> len = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return len[m - 1];
}

int parse_fixed_digits(std::string_view s, std::size_t pos, std::size_t n, std::string_view whole) {
    if (pos + n > s.size()) throw ValidationError("bad timestamp '" + std::string(whole) + "'");
    int v = 0;
    const auto res = std::from_chars(s.data() + pos, s.data() + pos + n, v);
    if (res.ec != std::errc{} || res.ptr != s.data() + pos + n)
        throw ValidationError("bad timestamp '" + std::string(whole) + "'");
    return v;
}

}  // namespace

std::int64_t parse_iso8601_utc(std::string_view s) {
    // YYYY-MM-DD [T hh:mm[:ss] Z]
    if (s.size() != 10 && s.size() != 17 && s.size() != 20)
        throw ValidationError("bad timestamp '" + std::string(s) + "' (expected ISO-8601 UTC)");
    const int year = parse_fixed_digits(s, 0, 4, s);
    const int month = parse_fixed_digits(s, 5, 2, s);
    const int day = parse_fixed_digits(s, 8, 2, s);
    if (s[4] != '-' || s[7] != '-')
        throw ValidationError("bad timestamp '" + std::string(s) + "'");
    int hh = 0, mm = 0, ss = 0;
    if (s.size() > 10) {
        if (s[10] != 'T' || s.back() != 'Z' || s[13] != ':')
            throw ValidationError("bad timestamp '" + std::string(s) + "'");
        hh = parse_fixed_digits(s, 11, 2, s);
        mm = parse_fixed_digits(s, 14, 2, s);
        if (s.size() == 20) {
            if (s[16] != ':') throw ValidationError("bad timestamp '" + std::string(s) + "'");
            ss = parse_fixed_digits(s, 17, 2, s);
        }
    }
    if (month < 1 || month > 12 || day < 1 ||
        day > static_cast<int>(days_in_month(year, static_cast<unsigned>(month))) ||
        hh > 23 || mm > 59 || ss > 59)
        throw ValidationError("bad timestamp '" + std::string(s) + "' (out-of-range field)");
    return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
           hh * 3600 + mm * 60 + ss;
}

std::string format_iso8601_utc(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

}  // namespace earlyguard
