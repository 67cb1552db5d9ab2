#include "ioforge/timeutil.hpp"

#include <array>
#include <cstdio>

namespace ioforge {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool parse_int(const std::string& s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601_utc(const std::string& s) {
    // Minimum form: YYYY-MM-DDTHH:MM:SSZ (20 chars).
    int year, month, day, hour, minute, second;
    if (s.size() < 20) return std::nullopt;
    if (!parse_int(s, 0, 4, year) || s[4] != '-' || !parse_int(s, 5, 2, month) ||
        s[7] != '-' || !parse_int(s, 8, 2, day)) {
        return std::nullopt;
    }
    if ((s[10] != 'T' && s[10] != ' ') || !parse_int(s, 11, 2, hour) || s[13] != ':' ||
        !parse_int(s, 14, 2, minute) || s[16] != ':' || !parse_int(s, 17, 2, second)) {
        return std::nullopt;
    }
    std::size_t rest = 19;
    if (rest < s.size() && s[rest] == '.') {
        ++rest;
        while (rest < s.size() && s[rest] >= '0' && s[rest] <= '9') ++rest;
    }
    if (rest >= s.size()) return std::nullopt;
    const std::string tz = s.substr(rest);
    if (tz != "Z" && tz != "+00:00" && tz != "+0000") return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
    return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
           hour * 3600 + minute * 60 + second;
}

std::string format_iso8601_utc(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    std::array<char, 24> buf{};
    std::snprintf(buf.data(), buf.size(), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return std::string(buf.data());
}

}  // namespace ioforge
