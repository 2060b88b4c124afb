#include "sessioncast/sessions.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sessioncast {

namespace {

constexpr double kMinEnergyKwh = 1.0;
constexpr double kMinDurationHours = 0.25;
constexpr double kFeasibilityTol = 1e-9;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void row_error(const std::filesystem::path& path, std::size_t row, const std::string& field,
                            const std::string& value) {
    throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": bad field '" +
                            field + "' (value: '" + value + "')");
}

double parse_real(const std::filesystem::path& path, std::size_t row, const std::string& field,
                  const std::string& value) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        row_error(path, row, field, value);
    }
    if (pos != value.size()) row_error(path, row, field, value);
    return v;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    return out;
}

}  // namespace

const char* to_string(Location loc) {
    return loc == Location::Workplace ? "workplace" : "residential";
}

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::NonPositiveDuration: return "NonPositiveDuration";
        case RejectReason::LowEnergy: return "LowEnergy";
        case RejectReason::ShortDuration: return "ShortDuration";
        case RejectReason::Infeasible: return "Infeasible";
    }
    return "?";
}

CleanResult clean_sessions(std::vector<ChargingSession> sessions) {
    CleanResult result;
    result.kept.reserve(sessions.size());
    for (auto& s : sessions) {
        if (s.departure <= s.arrival) {
            result.rejected.push_back({std::move(s), RejectReason::NonPositiveDuration});
        } else if (s.energy_kwh < kMinEnergyKwh) {
            result.rejected.push_back({std::move(s), RejectReason::LowEnergy});
        } else if (s.duration_hours() < kMinDurationHours) {
            result.rejected.push_back({std::move(s), RejectReason::ShortDuration});
        } else if (s.energy_kwh > s.max_power_kw * s.duration_hours() + kFeasibilityTol) {
            result.rejected.push_back({std::move(s), RejectReason::Infeasible});
        } else {
            result.kept.push_back(std::move(s));
        }
    }
    return result;
}

namespace {

void check_header(const std::filesystem::path& path, const std::string& line,
                  const std::string& expected) {
    std::string got = line;
    if (!got.empty() && got.back() == '\r') got.pop_back();
    if (got != expected) {
        throw std::runtime_error(path.string() + ": bad header (expected '" + expected + "')");
    }
}

}  // namespace

std::vector<ChargingSession> parse_sessions(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
    check_header(path, line,
                 "session_id,car_id,station_id,location,arrival,departure,energy_kwh,max_power_kw");
    std::vector<ChargingSession> sessions;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     ": expected 8 fields, got " + std::to_string(f.size()));
        }
        ChargingSession s;
        s.session_id = f[0];
        s.car_id = f[1];
        s.station_id = f[2];
        if (f[3] == "workplace") {
            s.location = Location::Workplace;
        } else if (f[3] == "residential") {
            s.location = Location::Residential;
        } else {
            row_error(path, row, "location", f[3]);
        }
        const auto arrival = parse_iso8601(f[4]);
        if (!arrival) row_error(path, row, "arrival", f[4]);
        s.arrival = *arrival;
        const auto departure = parse_iso8601(f[5]);
        if (!departure) row_error(path, row, "departure", f[5]);
        s.departure = *departure;
        s.energy_kwh = parse_real(path, row, "energy_kwh", f[6]);
        s.max_power_kw = parse_real(path, row, "max_power_kw", f[7]);
        if (s.energy_kwh < 0.0) row_error(path, row, "energy_kwh", f[6]);
        if (s.max_power_kw <= 0.0) row_error(path, row, "max_power_kw", f[7]);
        sessions.push_back(std::move(s));
    }
    return sessions;
}

void write_sessions(const std::filesystem::path& path, std::span<const ChargingSession> sessions) {
    auto out = open_output(path);
    out << "session_id,car_id,station_id,location,arrival,departure,energy_kwh,max_power_kw\n";
    for (const auto& s : sessions) {
        out << s.session_id << ',' << s.car_id << ',' << s.station_id << ',' << to_string(s.location)
            << ',' << format_iso8601(s.arrival) << ',' << format_iso8601(s.departure) << ','
            << format_real(s.energy_kwh) << ',' << format_real(s.max_power_kw) << '\n';
    }
}

WeatherMap load_weather(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
    check_header(path, line, "hour_start,temp_c,wind_mps,precip_mm");
    WeatherMap weather;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     ": expected 4 fields, got " + std::to_string(f.size()));
        }
        WeatherRecord rec;
        const auto ts = parse_iso8601(f[0]);
        if (!ts) row_error(path, row, "hour_start", f[0]);
        rec.hour_start = *ts;
        rec.temp_c = parse_real(path, row, "temp_c", f[1]);
        rec.wind_mps = parse_real(path, row, "wind_mps", f[2]);
        rec.precip_mm = parse_real(path, row, "precip_mm", f[3]);
        if (rec.wind_mps < 0.0) row_error(path, row, "wind_mps", f[2]);
        if (rec.precip_mm < 0.0) row_error(path, row, "precip_mm", f[3]);
        if (!weather.emplace(rec.hour_start, rec).second) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     ": duplicate hour_start " + f[0]);
        }
    }
    return weather;
}

void write_weather(const std::filesystem::path& path, const WeatherMap& weather) {
    auto out = open_output(path);
    out << "hour_start,temp_c,wind_mps,precip_mm\n";
    for (const auto& [ts, rec] : weather) {
        out << format_iso8601(ts) << ',' << format_real(rec.temp_c) << ','
            << format_real(rec.wind_mps) << ',' << format_real(rec.precip_mm) << '\n';
    }
}

CalendarInfo load_calendar(const std::filesystem::path& path) {
    auto in = open_input(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    CalendarInfo cal;
    auto read_set = [&](const char* key, std::set<std::int64_t>& out) {
        if (!doc.contains(key)) throw std::runtime_error(path.string() + ": missing key " + key);
        for (const auto& item : doc.at(key)) {
            const auto d = parse_date(item.get<std::string>());
            if (!d) throw std::runtime_error(path.string() + ": bad date in " + std::string(key));
            out.insert(days_from_civil(d->year, d->month, d->day));
        }
    };
    read_set("national_holidays", cal.national_holidays);
    read_set("school_holidays", cal.school_holidays);
    return cal;
}

void write_calendar(const std::filesystem::path& path, const CalendarInfo& calendar) {
    nlohmann::json doc;
    auto dump_set = [](const std::set<std::int64_t>& days) {
        nlohmann::json arr = nlohmann::json::array();
        for (auto d : days) arr.push_back(format_date(civil_from_days(d)));
        return arr;
    };
    doc["national_holidays"] = dump_set(calendar.national_holidays);
    doc["school_holidays"] = dump_set(calendar.school_holidays);
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

}  // namespace sessioncast
