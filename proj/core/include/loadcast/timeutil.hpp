#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace loadcast {

/// UTC instant with second resolution. Offsets are resolved at parse time.
using Timestamp = std::chrono::sys_seconds;

constexpr std::chrono::seconds kHour{3600};

/// Parses ISO-8601 `YYYY-MM-DDTHH:MM[:SS](Z|+hh:mm|-hh:mm)`. A bare date
/// `YYYY-MM-DD` is accepted as midnight UTC. Throws InvalidInput.
Timestamp parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp t);

inline Timestamp floor_hour(Timestamp t) {
    return std::chrono::floor<std::chrono::hours>(t);
}

inline std::int64_t hours_between(Timestamp from, Timestamp to) {
    return std::chrono::duration_cast<std::chrono::hours>(to - from).count();
}

inline std::int64_t unix_seconds(Timestamp t) { return t.time_since_epoch().count(); }

inline Timestamp from_unix_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

} // namespace loadcast
