#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sessioncast {

// Seconds since the Unix epoch, UTC, timezone-naive.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1-12
    int day = 1;    // 1-31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
    friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);

Timestamp make_timestamp(int year, int month, int day, int hour = 0, int minute = 0, int second = 0);

// "YYYY-MM-DDTHH:MM:SSZ"
std::optional<Timestamp> parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp ts);

// "YYYY-MM-DD"
std::optional<CivilDate> parse_date(std::string_view text);
std::string format_date(const CivilDate& date);

inline Timestamp floor_to_hour(Timestamp ts) {
    return ts - ((ts % kSecondsPerHour) + kSecondsPerHour) % kSecondsPerHour;
}

inline Timestamp floor_to_day(Timestamp ts) {
    return ts - ((ts % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay;
}

// Local civil fields under a fixed UTC offset (hours). The offset stands in
// for the deployment's civil timezone; no DST handling.
struct LocalFields {
    int hour = 0;     // 0-23
    int month = 1;    // 1-12
    int season = 0;   // 0 winter (Dec-Feb), 1 spring, 2 summer, 3 autumn
    int weekday = 0;  // 0 Monday .. 6 Sunday
    bool weekend = false;
    CivilDate date;
};

LocalFields local_fields(Timestamp ts, int utc_offset_hours);

}  // namespace sessioncast
