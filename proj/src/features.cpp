#include "sessioncast/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace sessioncast {

const char* feature_name(FeatureId id) {
    switch (id) {
        case FeatureId::Hour: return "HOUR";
        case FeatureId::Month: return "MONTH";
        case FeatureId::Season: return "SEASON";
        case FeatureId::Weekday: return "T:WD";
        case FeatureId::NationalHoliday: return "T:NH";
        case FeatureId::SchoolHoliday: return "T:SH";
        case FeatureId::Weekend: return "T:W";
        case FeatureId::CarAvg: return "H:AVC";
        case FeatureId::StationAvg: return "H:AVS";
        case FeatureId::HourAvg: return "H:AVH";
        case FeatureId::CarMax: return "H:MAX";
        case FeatureId::CarMin: return "H:MIN";
        case FeatureId::Temperature: return "M:T";
        case FeatureId::WindSpeed: return "M:WS";
        case FeatureId::Precipitation: return "M:PV";
    }
    return "?";
}

const char* to_string(Target t) { return t == Target::Energy ? "energy" : "duration"; }

const char* to_string(ModelVariant v) { return v == ModelVariant::Model1 ? "model1" : "model2"; }

std::array<bool, kNumFeatures> variant_mask(ModelVariant v) {
    std::array<bool, kNumFeatures> mask;
    mask.fill(true);
    if (v == ModelVariant::Model1) {
        mask[static_cast<int>(FeatureId::CarAvg)] = false;
        mask[static_cast<int>(FeatureId::StationAvg)] = false;
        mask[static_cast<int>(FeatureId::CarMax)] = false;
        mask[static_cast<int>(FeatureId::CarMin)] = false;
    }
    return mask;
}

void HistoryIndex::Series::add(Timestamp arrival, double value) {
    const std::size_t n = arrivals.size();
    arrivals.push_back(arrival);
    prefix_sum.push_back((n ? prefix_sum.back() : 0.0) + value);
    prefix_max.push_back(n ? std::max(prefix_max.back(), value) : value);
    prefix_min.push_back(n ? std::min(prefix_min.back(), value) : value);
}

HistoryStats HistoryIndex::Series::query(Timestamp cutoff) const {
    const auto it = std::lower_bound(arrivals.begin(), arrivals.end(), cutoff);
    const std::size_t k = static_cast<std::size_t>(it - arrivals.begin());
    HistoryStats stats;
    if (k == 0) return stats;
    stats.count = static_cast<int>(k);
    stats.mean = prefix_sum[k - 1] / static_cast<double>(k);
    stats.max = prefix_max[k - 1];
    stats.min = prefix_min[k - 1];
    return stats;
}

HistoryIndex::HistoryIndex(std::span<const ChargingSession> sessions, Target target,
                           int utc_offset_hours)
    : target_(target), utc_offset_(utc_offset_hours) {
    std::vector<const ChargingSession*> ordered;
    ordered.reserve(sessions.size());
    for (const auto& s : sessions) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->arrival < b->arrival; });
    for (const auto* s : ordered) {
        const double value = target_value(*s, target);
        by_car_[s->car_id].add(s->arrival, value);
        by_station_[s->station_id].add(s->arrival, value);
        by_hour_[static_cast<std::size_t>(local_fields(s->arrival, utc_offset_).hour)].add(
            s->arrival, value);
        global_.add(s->arrival, value);
    }
}

HistoryStats HistoryIndex::car(const std::string& car_id, Timestamp cutoff) const {
    const auto it = by_car_.find(car_id);
    return it == by_car_.end() ? HistoryStats{} : it->second.query(cutoff);
}

HistoryStats HistoryIndex::station(const std::string& station_id, Timestamp cutoff) const {
    const auto it = by_station_.find(station_id);
    return it == by_station_.end() ? HistoryStats{} : it->second.query(cutoff);
}

HistoryStats HistoryIndex::hour(int local_hour, Timestamp cutoff) const {
    return by_hour_[static_cast<std::size_t>(local_hour)].query(cutoff);
}

HistoryStats HistoryIndex::global(Timestamp cutoff) const { return global_.query(cutoff); }

FeatureVector featurize(const ChargingSession& session, const HistoryIndex& index,
                        const WeatherMap& weather, const CalendarInfo& calendar,
                        ModelVariant variant, Timestamp cutoff) {
    if (cutoff < 0) cutoff = session.arrival;
    FeatureVector fv;
    fv.mask = variant_mask(variant);
    fv.target = target_value(session, index.target());
    fv.car_id = session.car_id;
    fv.location = session.location;
    fv.arrival = session.arrival;

    const LocalFields lf = local_fields(session.arrival, index.utc_offset_hours());
    auto set = [&](FeatureId id, double v) { fv.values[static_cast<int>(id)] = v; };
    set(FeatureId::Hour, lf.hour);
    set(FeatureId::Month, lf.month);
    set(FeatureId::Season, lf.season);
    set(FeatureId::Weekday, lf.weekday);
    set(FeatureId::NationalHoliday, calendar.is_national_holiday(lf.date) ? 1.0 : 0.0);
    set(FeatureId::SchoolHoliday, calendar.is_school_holiday(lf.date) ? 1.0 : 0.0);
    set(FeatureId::Weekend, lf.weekend ? 1.0 : 0.0);

    const HistoryStats global = index.global(cutoff);
    const double global_mean = global.count > 0 ? global.mean : 0.0;

    const HistoryStats hour = index.hour(lf.hour, cutoff);
    set(FeatureId::HourAvg, hour.count > 0 ? hour.mean : global_mean);

    if (variant == ModelVariant::Model2) {
        const HistoryStats car = index.car(session.car_id, cutoff);
        if (car.count == 0) {
            throw std::invalid_argument("featurize: Model2 requested for car without history: " +
                                        session.car_id);
        }
        set(FeatureId::CarAvg, car.mean);
        set(FeatureId::CarMax, car.max);
        set(FeatureId::CarMin, car.min);
        const HistoryStats station = index.station(session.station_id, cutoff);
        set(FeatureId::StationAvg, station.count > 0 ? station.mean : global_mean);
    }

    const auto wit = weather.find(floor_to_hour(session.arrival));
    if (wit == weather.end()) {
        throw std::runtime_error("featurize: no weather row for hour " +
                                 format_iso8601(floor_to_hour(session.arrival)));
    }
    set(FeatureId::Temperature, wit->second.temp_c);
    set(FeatureId::WindSpeed, wit->second.wind_mps);
    set(FeatureId::Precipitation, wit->second.precip_mm);

    return fv;
}

Matrix feature_matrix(std::span<const FeatureVector> vectors) {
    Matrix m(vectors.size(), kNumFeatures);
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        for (int c = 0; c < kNumFeatures; ++c) {
            m.at(r, static_cast<std::size_t>(c)) = vectors[r].mask[c] ? vectors[r].values[c] : 0.0;
        }
    }
    return m;
}

std::vector<double> target_vector(std::span<const FeatureVector> vectors) {
    std::vector<double> y(vectors.size());
    for (std::size_t r = 0; r < vectors.size(); ++r) y[r] = vectors[r].target;
    return y;
}

}  // namespace sessioncast
