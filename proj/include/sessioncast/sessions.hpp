#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sessioncast/time_utils.hpp"

namespace sessioncast {

enum class Location { Workplace, Residential };

const char* to_string(Location loc);

struct ChargingSession {
    std::string session_id;
    std::string car_id;
    std::string station_id;
    Location location = Location::Residential;
    Timestamp arrival = 0;
    Timestamp departure = 0;
    double energy_kwh = 0.0;
    double max_power_kw = 0.0;

    double duration_hours() const {
        return static_cast<double>(departure - arrival) / kSecondsPerHour;
    }

    friend bool operator==(const ChargingSession&, const ChargingSession&) = default;
};

enum class RejectReason { NonPositiveDuration, LowEnergy, ShortDuration, Infeasible };

const char* to_string(RejectReason reason);

struct RejectedSession {
    ChargingSession session;
    RejectReason reason;
};

struct CleanResult {
    std::vector<ChargingSession> kept;
    std::vector<RejectedSession> rejected;
};

// Keeps sessions with energy >= 1 kWh, duration >= 15 min, and enough
// connection time to deliver the energy at the station's max power.
// Rejection is data, not an error; |kept| + |rejected| == |input|.
CleanResult clean_sessions(std::vector<ChargingSession> sessions);

// CSV: session_id,car_id,station_id,location,arrival,departure,energy_kwh,max_power_kw
std::vector<ChargingSession> parse_sessions(const std::filesystem::path& path);
void write_sessions(const std::filesystem::path& path, std::span<const ChargingSession> sessions);

struct WeatherRecord {
    Timestamp hour_start = 0;
    double temp_c = 0.0;
    double wind_mps = 0.0;
    double precip_mm = 0.0;

    friend bool operator==(const WeatherRecord&, const WeatherRecord&) = default;
};

using WeatherMap = std::map<Timestamp, WeatherRecord>;

// CSV: hour_start,temp_c,wind_mps,precip_mm (hourly rows, duplicate hours are an error)
WeatherMap load_weather(const std::filesystem::path& path);
void write_weather(const std::filesystem::path& path, const WeatherMap& weather);

struct CalendarInfo {
    std::set<std::int64_t> national_holidays;  // day numbers (days since epoch)
    std::set<std::int64_t> school_holidays;

    bool is_national_holiday(const CivilDate& d) const {
        return national_holidays.count(days_from_civil(d.year, d.month, d.day)) > 0;
    }
    bool is_school_holiday(const CivilDate& d) const {
        return school_holidays.count(days_from_civil(d.year, d.month, d.day)) > 0;
    }
};

// JSON: {"national_holidays":["YYYY-MM-DD",...],"school_holidays":[...]}
CalendarInfo load_calendar(const std::filesystem::path& path);
void write_calendar(const std::filesystem::path& path, const CalendarInfo& calendar);

}  // namespace sessioncast
