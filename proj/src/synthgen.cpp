#include "sessioncast/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "sessioncast/matrix.hpp"

namespace sessioncast {

namespace {

constexpr double kPi = 3.14159265358979323846;

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo, double hi) {
    std::normal_distribution<double> dist(mean, sd);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const double v = dist(rng);
        if (v >= lo && v <= hi) return v;
    }
    return std::clamp(mean, lo, hi);
}

int pick_mode(std::mt19937_64& rng, const std::vector<double>& weights) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return static_cast<int>(i);
        u -= weights[i];
    }
    return static_cast<int>(weights.size()) - 1;
}

void validate(const SynthConfig& config) {
    if (!(config.end_date > config.start_date)) {
        throw std::invalid_argument("synthgen: end_date must be after start_date");
    }
    for (const LocationParams* loc : {&config.workplace, &config.residential}) {
        if (loc->n_cars <= 0) throw std::invalid_argument("synthgen: n_cars must be positive");
        if (loc->duration_modes.empty()) {
            throw std::invalid_argument("synthgen: need at least one duration mode");
        }
        double total = 0.0;
        for (const auto& m : loc->duration_modes) {
            if (m.sd_h <= 0.0) throw std::invalid_argument("synthgen: non-positive duration spread");
            total += m.weight;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("synthgen: duration mode weights must sum to 1");
        }
    }
}

std::vector<CarProfile> make_profiles(const SynthConfig& config, Location location,
                                      std::uint64_t salt) {
    const LocationParams& loc =
        location == Location::Workplace ? config.workplace : config.residential;
    const char tag = location == Location::Workplace ? 'W' : 'R';
    const std::int64_t total_days = days_from_civil(config.end_date.year, config.end_date.month,
                                                    config.end_date.day) -
                                    days_from_civil(config.start_date.year, config.start_date.month,
                                                    config.start_date.day);
    const int n_stations = std::max(1, loc.n_cars / 2);

    std::vector<CarProfile> profiles;
    profiles.reserve(static_cast<std::size_t>(loc.n_cars));
    for (int i = 0; i < loc.n_cars; ++i) {
        std::mt19937_64 rng(mix_seed(config.seed, salt * 100000 + static_cast<std::uint64_t>(i)));
        CarProfile car;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%c%04d", tag, i);
        car.car_id = buf;
        std::snprintf(buf, sizeof(buf), "S%c%03d", tag, i % n_stations);
        car.home_station_id = buf;
        car.location = location;
        car.arrival_mean_hour = truncated_normal(rng, loc.arrival_mean_hour, loc.arrival_between_sd,
                                                 0.0, 23.5);
        car.energy_mean_kwh = truncated_normal(rng, loc.energy_mean_kwh, loc.energy_between_sd,
                                               loc.energy_lo_kwh, loc.energy_hi_kwh);
        car.duration_offset_h =
            loc.duration_car_sd > 0.0
                ? std::normal_distribution<double>(0.0, loc.duration_car_sd)(rng)
                : 0.0;
        car.mode_weights.resize(loc.duration_modes.size());
        double total = 0.0;
        for (std::size_t m = 0; m < loc.duration_modes.size(); ++m) {
            double w = loc.duration_modes[m].weight;
            if (loc.mode_pref_sd > 0.0) {
                w = std::clamp(w + std::normal_distribution<double>(0.0, loc.mode_pref_sd)(rng),
                               0.02, 0.98);
            }
            car.mode_weights[m] = w;
            total += w;
        }
        for (auto& w : car.mode_weights) w /= total;
        if (loc.departure_mean_hour > 0.0) {
            car.departure_mean_hour = truncated_normal(rng, loc.departure_mean_hour,
                                                       loc.departure_car_sd, 0.0, 23.5);
        }
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        if (uni(rng) < loc.fresh_car_fraction && total_days > config.fresh_after_days + 1) {
            car.first_active_day = static_cast<int>(
                std::uniform_int_distribution<std::int64_t>(config.fresh_after_days,
                                                            total_days - 1)(rng));
        }
        profiles.push_back(std::move(car));
    }
    return profiles;
}

void gen_for_location(const SynthConfig& config, Location location, std::uint64_t salt,
                      const WeatherMap& weather, std::vector<ChargingSession>& out) {
    const LocationParams& loc =
        location == Location::Workplace ? config.workplace : config.residential;
    const std::int64_t day0 = days_from_civil(config.start_date.year, config.start_date.month,
                                              config.start_date.day);
    const std::int64_t total_days = days_from_civil(config.end_date.year, config.end_date.month,
                                                    config.end_date.day) -
                                    day0;
    const auto profiles = make_profiles(config, location, salt);

    for (std::size_t ci = 0; ci < profiles.size(); ++ci) {
        const CarProfile& car = profiles[ci];
        std::mt19937_64 rng(mix_seed(config.seed, salt * 100000 + 50000 + ci));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (std::int64_t d = car.first_active_day; d < total_days; ++d) {
            const int weekday = static_cast<int>(((day0 + d) % 7 + 7 + 3) % 7);  // 0 = Monday
            if (uni(rng) >= loc.weekday_activity[static_cast<std::size_t>(weekday)]) continue;

            ChargingSession s;
            s.car_id = car.car_id;
            s.station_id = car.home_station_id;
            s.location = location;
            s.max_power_kw = config.station_power_kw;

            const double local_hour = truncated_normal(rng, car.arrival_mean_hour,
                                                       loc.arrival_within_sd, 0.0, 23.98);
            const std::int64_t second_of_hour =
                std::uniform_int_distribution<std::int64_t>(0, 59)(rng);
            s.arrival = (day0 + d) * kSecondsPerDay +
                        static_cast<std::int64_t>(local_hour * 3600.0) + second_of_hour -
                        static_cast<std::int64_t>(config.utc_offset_hours) * kSecondsPerHour;

            const int mode_index = pick_mode(rng, car.mode_weights);
            const DurationMode& mode = loc.duration_modes[static_cast<std::size_t>(mode_index)];
            double duration_h;
            if (loc.departure_mean_hour > 0.0) {
                const double anchor =
                    car.departure_mean_hour +
                    loc.departure_weekday_offset_h[static_cast<std::size_t>(weekday)];
                duration_h = truncated_normal(rng, anchor - local_hour,
                                              loc.departure_within_sd,
                                              std::max(mode.lo_h, 0.26), mode.hi_h);
            } else if (mode.anchor_hour > 0.0) {
                const double anchor =
                    mode.anchor_hour +
                    loc.departure_weekday_offset_h[static_cast<std::size_t>(weekday)];
                duration_h = truncated_normal(
                    rng, anchor + 24.0 - local_hour + car.duration_offset_h, mode.sd_h,
                    std::max(mode.lo_h, 0.26), mode.hi_h);
            } else {
                duration_h = truncated_normal(rng, mode.mean_h + car.duration_offset_h, mode.sd_h,
                                              std::max(mode.lo_h, 0.26), mode.hi_h);
            }
            s.departure = s.arrival + static_cast<std::int64_t>(duration_h * 3600.0) + 1;

            double energy_mean = car.energy_mean_kwh +
                                 loc.energy_weekday_bump_kwh[static_cast<std::size_t>(weekday)];
            if (loc.energy_cold_coeff_kwh_per_c > 0.0) {
                const auto wx = weather.find(floor_to_hour(s.arrival));
                const double temp = wx != weather.end() ? wx->second.temp_c : 10.0;
                energy_mean += loc.energy_cold_coeff_kwh_per_c *
                               loc.cold_weekday_scale[static_cast<std::size_t>(weekday)] *
                               std::max(0.0, 10.0 - temp);
            }
            const double feasible_cap = config.station_power_kw * s.duration_hours() - 0.01;
            const double hi = std::min(loc.energy_hi_kwh, feasible_cap);
            s.energy_kwh = hi <= 1.0 ? hi
                                     : truncated_normal(rng, energy_mean,
                                                        loc.energy_within_sd, 1.0, hi);
            out.push_back(std::move(s));
        }
    }
}

}  // namespace

SynthConfig default_synth_config() {
    SynthConfig config;

    LocationParams& w = config.workplace;
    w.n_cars = 24;
    w.weekday_activity = {0.40, 0.40, 0.40, 0.40, 0.24, 0.015, 0.015};
    w.arrival_mean_hour = 8.0;
    w.arrival_between_sd = 0.6;
    w.arrival_within_sd = 0.5;
    w.duration_modes = {{1.0, 8.87, 0.8, 4.0, 14.0}};
    w.duration_car_sd = 0.0;
    w.departure_mean_hour = 16.87;  // mean stay 16.87 - 8.0 = 8.87 h
    w.departure_car_sd = 0.6;
    w.departure_within_sd = 0.5;
    // Slow starts early in the week, early Friday departures.
    w.departure_weekday_offset_h = {0.3, 0.1, 0.1, 0.0, -1.5, 0.0, 0.0};
    w.energy_mean_kwh = 17.5;  // left truncation at 3 kWh pulls the sample mean up to ~21
    w.energy_between_sd = 14.0;
    w.energy_within_sd = 3.5;
    w.energy_lo_kwh = 3.0;
    w.energy_hi_kwh = 70.0;
    w.energy_cold_coeff_kwh_per_c = 0.6;
    // Cars sit outside all weekend, so Monday plug-ins arrive cold-soaked.
    w.cold_weekday_scale = {2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    // Weekend driving gets charged back on Monday morning.
    w.energy_weekday_bump_kwh = {5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

    LocationParams& r = config.residential;
    r.n_cars = 100;
    r.weekday_activity = {0.28, 0.28, 0.28, 0.28, 0.28, 0.28, 0.28};
    r.arrival_mean_hour = 17.5;
    r.arrival_between_sd = 2.5;
    r.arrival_within_sd = 1.8;
    // Overnight stays end near a mid-morning unplug time rather than lasting a
    // fixed number of hours, so their duration falls linearly with arrival hour.
    r.duration_modes = {{0.30, 3.0, 1.0, 0.5, 6.5}, {0.70, 16.0, 1.5, 10.0, 26.0, 9.5}};
    r.duration_car_sd = 1.0;
    // Wide preference spread: many cars are near-deterministic short-stop or
    // overnight chargers, so per-car history carries real duration signal.
    r.mode_pref_sd = 0.45;
    r.energy_mean_kwh = 24.0;
    r.energy_between_sd = 15.0;
    r.energy_within_sd = 4.0;
    r.energy_lo_kwh = 3.0;
    r.energy_hi_kwh = 80.0;
    r.energy_cold_coeff_kwh_per_c = 0.6;
    // Weekend trips leave the car parked outdoors in the cold.
    r.cold_weekday_scale = {1.0, 1.0, 1.0, 1.0, 1.0, 1.6, 1.6};
    // Weekend trips drain the battery before Saturday/Sunday plug-ins.
    r.energy_weekday_bump_kwh = {0.0, 0.0, 0.0, 0.0, 0.0, 3.0, 3.0};
    // Friday and Saturday overnight stays run long: nobody unplugs early on a
    // weekend morning.
    r.departure_weekday_offset_h = {0.0, 0.0, 0.0, 0.0, 1.5, 1.5, 0.0};

    return config;
}

std::vector<CarProfile> gen_car_profiles(const SynthConfig& config) {
    validate(config);
    auto profiles = make_profiles(config, Location::Workplace, 1);
    auto res = make_profiles(config, Location::Residential, 2);
    profiles.insert(profiles.end(), std::make_move_iterator(res.begin()),
                    std::make_move_iterator(res.end()));
    return profiles;
}

std::vector<ChargingSession> gen_sessions(const SynthConfig& config) {
    validate(config);
    std::vector<ChargingSession> sessions;
    const WeatherMap weather = gen_weather(config.seed, config.start_date, config.end_date);
    gen_for_location(config, Location::Workplace, 1, weather, sessions);
    gen_for_location(config, Location::Residential, 2, weather, sessions);
    std::stable_sort(sessions.begin(), sessions.end(), [](const auto& a, const auto& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.car_id < b.car_id;
    });
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "S%06zu", i);
        sessions[i].session_id = buf;
    }
    return sessions;
}

WeatherMap gen_weather(std::uint64_t seed, CivilDate start, CivilDate end) {
    if (!(end > start)) throw std::invalid_argument("gen_weather: empty date range");
    const std::int64_t day0 = days_from_civil(start.year, start.month, start.day);
    const std::int64_t day1 = days_from_civil(end.year, end.month, end.day);
    std::mt19937_64 rng(mix_seed(seed, 0x77));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::exponential_distribution<double> rain(1.0 / 1.5);

    WeatherMap weather;
    for (std::int64_t d = day0; d < day1; ++d) {
        const double doy = static_cast<double>(((d % 365) + 365) % 365);
        for (int h = 0; h < 24; ++h) {
            WeatherRecord rec;
            rec.hour_start = d * kSecondsPerDay + h * kSecondsPerHour;
            rec.temp_c = 10.0 - 8.0 * std::cos(2.0 * kPi * (doy - 15.0) / 365.25) -
                         3.0 * std::cos(2.0 * kPi * (h - 14) / 24.0) + 2.0 * noise(rng);
            rec.wind_mps = std::max(0.0, 4.0 + 2.0 * noise(rng));
            rec.precip_mm = uni(rng) < 0.08 ? rain(rng) : 0.0;
            weather.emplace(rec.hour_start, rec);
        }
    }
    return weather;
}

CalendarInfo gen_calendar(CivilDate start, CivilDate end) {
    if (!(end > start)) throw std::invalid_argument("gen_calendar: empty date range");
    CalendarInfo cal;
    auto add_range = [](std::set<std::int64_t>& days, const CivilDate& from, const CivilDate& to) {
        const std::int64_t a = days_from_civil(from.year, from.month, from.day);
        const std::int64_t b = days_from_civil(to.year, to.month, to.day);
        for (std::int64_t d = a; d <= b; ++d) days.insert(d);
    };
    const std::int64_t lo = days_from_civil(start.year, start.month, start.day);
    const std::int64_t hi = days_from_civil(end.year, end.month, end.day);
    for (int y = start.year - 1; y <= end.year; ++y) {
        // Dutch-style fixed blocks.
        for (const CivilDate d : {CivilDate{y, 1, 1}, CivilDate{y, 4, 27}, CivilDate{y, 5, 5},
                                  CivilDate{y, 12, 25}, CivilDate{y, 12, 26}}) {
            cal.national_holidays.insert(days_from_civil(d.year, d.month, d.day));
        }
        add_range(cal.school_holidays, {y, 7, 15}, {y, 8, 31});
        add_range(cal.school_holidays, {y, 12, 24}, {y, 12, 31});
        add_range(cal.school_holidays, {y + 1, 1, 1}, {y + 1, 1, 7});
        add_range(cal.school_holidays, {y, 2, 20}, {y, 2, 27});
        add_range(cal.school_holidays, {y, 5, 1}, {y, 5, 7});
    }
    std::erase_if(cal.national_holidays, [&](std::int64_t d) { return d < lo || d >= hi; });
    std::erase_if(cal.school_holidays, [&](std::int64_t d) { return d < lo || d >= hi; });
    return cal;
}

}  // namespace sessioncast
