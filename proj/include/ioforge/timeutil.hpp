#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ioforge {

// Parses "YYYY-MM-DDTHH:MM:SSZ" (fractional seconds and "+00:00" accepted)
// into Unix seconds. Returns nullopt on malformed input or non-UTC offsets.
std::optional<std::int64_t> parse_iso8601_utc(const std::string& s);

// Formats Unix seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(std::int64_t t);

// UTC calendar day index (floor of t / 86400, correct for negative t).
inline std::int64_t utc_day_index(std::int64_t t) {
    std::int64_t d = t / 86400;
    if (t % 86400 < 0) --d;
    return d;
}

}  // namespace ioforge
