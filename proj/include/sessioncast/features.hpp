#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sessioncast/matrix.hpp"
#include "sessioncast/sessions.hpp"

namespace sessioncast {

// The 15 features, in fixed column order.
enum class FeatureId : int {
    Hour = 0,          // HOUR
    Month,             // MONTH
    Season,            // SEASON
    Weekday,           // T:WD, 0 = Monday
    NationalHoliday,   // T:NH
    SchoolHoliday,     // T:SH
    Weekend,           // T:W
    CarAvg,            // H:AVC   (Model 2 only)
    StationAvg,        // H:AVS   (Model 2 only)
    HourAvg,           // H:AVH
    CarMax,            // H:MAX   (Model 2 only)
    CarMin,            // H:MIN   (Model 2 only)
    Temperature,       // M:T
    WindSpeed,         // M:WS
    Precipitation,     // M:PV
};

inline constexpr int kNumFeatures = 15;

const char* feature_name(FeatureId id);

enum class Target { Energy, Duration };
enum class ModelVariant { Model1, Model2 };

const char* to_string(Target t);
const char* to_string(ModelVariant v);

inline double target_value(const ChargingSession& s, Target t) {
    return t == Target::Energy ? s.energy_kwh : s.duration_hours();
}

// All-true for Model 2; Model 1 masks off the four car/station history slots.
std::array<bool, kNumFeatures> variant_mask(ModelVariant v);

struct HistoryStats {
    int count = 0;
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
};

// Running aggregates of one target over sessions keyed by car, station, and
// local hour of day. Queries at cutoff t only see sessions with arrival
// strictly before t, so featurization stays causal even for training rows.
class HistoryIndex {
public:
    HistoryIndex(std::span<const ChargingSession> sessions, Target target, int utc_offset_hours);

    Target target() const { return target_; }
    int utc_offset_hours() const { return utc_offset_; }

    HistoryStats car(const std::string& car_id, Timestamp cutoff) const;
    HistoryStats station(const std::string& station_id, Timestamp cutoff) const;
    HistoryStats hour(int local_hour, Timestamp cutoff) const;
    HistoryStats global(Timestamp cutoff) const;

private:
    struct Series {
        std::vector<Timestamp> arrivals;   // ascending
        std::vector<double> prefix_sum;    // aggregates over arrivals[0..i)
        std::vector<double> prefix_max;
        std::vector<double> prefix_min;

        void add(Timestamp arrival, double value);
        HistoryStats query(Timestamp cutoff) const;
    };

    Target target_;
    int utc_offset_;
    std::map<std::string, Series> by_car_;
    std::map<std::string, Series> by_station_;
    std::array<Series, 24> by_hour_;
    Series global_;
};

struct FeatureVector {
    std::array<double, kNumFeatures> values{};
    std::array<bool, kNumFeatures> mask{};
    double target = 0.0;
    std::string car_id;
    Location location = Location::Residential;
    Timestamp arrival = 0;
};

// Feature encoding for one session at a causal cutoff (defaults to the
// session's own arrival). Model 2 requires the car to have prior history.
FeatureVector featurize(const ChargingSession& session, const HistoryIndex& index,
                        const WeatherMap& weather, const CalendarInfo& calendar,
                        ModelVariant variant, Timestamp cutoff = -1);

Matrix feature_matrix(std::span<const FeatureVector> vectors);
std::vector<double> target_vector(std::span<const FeatureVector> vectors);

}  // namespace sessioncast
