#include "sessioncast/time_utils.hpp"

#include <cstdio>

namespace sessioncast {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Timestamp make_timestamp(int year, int month, int day, int hour, int minute, int second) {
    return days_from_civil(year, month, day) * kSecondsPerDay + hour * 3600 + minute * 60 + second;
}

namespace {

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, s;
    if (!parse_fixed_int(text, 0, 4, y) || !parse_fixed_int(text, 5, 2, mo) ||
        !parse_fixed_int(text, 8, 2, d) || !parse_fixed_int(text, 11, 2, h) ||
        !parse_fixed_int(text, 14, 2, mi) || !parse_fixed_int(text, 17, 2, s)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || s > 60) return std::nullopt;
    if (civil_from_days(days_from_civil(y, mo, d)) != CivilDate{y, mo, d}) return std::nullopt;
    return make_timestamp(y, mo, d, h, mi, s);
}

std::string format_iso8601(Timestamp ts) {
    const std::int64_t days = ts >= 0 ? ts / kSecondsPerDay : (ts - kSecondsPerDay + 1) / kSecondsPerDay;
    const std::int64_t sod = ts - days * kSecondsPerDay;
    const CivilDate cd = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", cd.year, cd.month, cd.day,
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

std::optional<CivilDate> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_fixed_int(text, 0, 4, y) || !parse_fixed_int(text, 5, 2, m) ||
        !parse_fixed_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1) return std::nullopt;
    if (civil_from_days(days_from_civil(y, m, d)) != CivilDate{y, m, d}) return std::nullopt;
    return CivilDate{y, m, d};
}

std::string format_date(const CivilDate& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", date.year, date.month, date.day);
    return buf;
}

LocalFields local_fields(Timestamp ts, int utc_offset_hours) {
    const Timestamp local = ts + static_cast<Timestamp>(utc_offset_hours) * kSecondsPerHour;
    const std::int64_t days =
        local >= 0 ? local / kSecondsPerDay : (local - kSecondsPerDay + 1) / kSecondsPerDay;
    const std::int64_t sod = local - days * kSecondsPerDay;
    LocalFields f;
    f.date = civil_from_days(days);
    f.hour = static_cast<int>(sod / 3600);
    f.month = f.date.month;
    f.season = (f.month % 12) / 3;  // Dec-Feb -> 0, Mar-May -> 1, ...
    // 1970-01-01 was a Thursday; Monday = 0.
    f.weekday = static_cast<int>(((days % 7) + 7 + 3) % 7);
    f.weekend = f.weekday >= 5;
    return f;
}

}  // namespace sessioncast
