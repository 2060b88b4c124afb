#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sessioncast/sessions.hpp"

namespace sessioncast {

struct DurationMode {
    double weight = 1.0;  // population-level mode probability
    double mean_h = 8.0;
    double sd_h = 1.0;
    double lo_h = 0.5;
    double hi_h = 24.0;
    // > 0: the stay ends near this civil hour on the following morning, so
    // duration = anchor_hour + 24 - arrival_hour (overnight charger pattern).
    // mean_h is ignored for such a mode.
    double anchor_hour = 0.0;
};

struct LocationParams {
    int n_cars = 50;
    std::array<double, 7> weekday_activity{};  // P(session on that weekday), Monday first
    double arrival_mean_hour = 8.0;            // local time
    double arrival_between_sd = 0.6;           // spread of per-car habitual arrival means
    double arrival_within_sd = 0.5;
    std::vector<DurationMode> duration_modes;
    double duration_car_sd = 1.0;    // per-car offset on the mode mean
    double mode_pref_sd = 0.0;       // per-car perturbation of mode weights
    // > 0: stays end near a civil departure hour instead of lasting a drawn
    // duration, so duration = departure - arrival (commuter pattern). The
    // clip bounds of duration_modes[0] still apply.
    double departure_mean_hour = 0.0;
    double departure_car_sd = 0.0;
    double departure_within_sd = 0.0;
    // Additive shift of the departure anchor per weekday of the arrival
    // (Monday first), e.g. early Friday departures or weekend lie-ins. Applies
    // both to location-level departure anchoring and to anchored duration
    // modes.
    std::array<double, 7> departure_weekday_offset_h{};
    double energy_mean_kwh = 20.0;   // population mean of per-car energy means
    double energy_between_sd = 12.0;
    double energy_within_sd = 4.0;
    double energy_lo_kwh = 2.0;
    double energy_hi_kwh = 75.0;
    // Extra kWh per degree C below 10 at plug-in (battery conditioning and
    // heater load in cold weather); 0 disables the weather coupling.
    double energy_cold_coeff_kwh_per_c = 0.0;
    // Per-weekday multiplier on the cold coefficient (Monday first), e.g. a
    // stronger Monday effect for cars that sat outside all weekend.
    std::array<double, 7> cold_weekday_scale{1, 1, 1, 1, 1, 1, 1};
    // Additive kWh shift of the demand mean per weekday (Monday first), e.g.
    // Monday surges at the office after weekend driving.
    std::array<double, 7> energy_weekday_bump_kwh{};
    double fresh_car_fraction = 0.15;  // cars first appearing after fresh_after_days
};

struct SynthConfig {
    std::uint64_t seed = 1;
    CivilDate start_date{2022, 1, 1};
    CivilDate end_date{2024, 1, 1};  // exclusive
    LocationParams workplace;
    LocationParams residential;
    double station_power_kw = 22.0;
    int fresh_after_days = 365;
    int utc_offset_hours = 1;
};

// Behavioral defaults: workplace commuter pattern (7-9 AM arrivals, workday-
// length stays, quiet weekends), residential short-stop/overnight bimodal
// pattern with a flat weekday profile.
SynthConfig default_synth_config();

struct CarProfile {
    std::string car_id;
    std::string home_station_id;
    Location location = Location::Residential;
    double arrival_mean_hour = 8.0;
    double energy_mean_kwh = 20.0;
    double duration_offset_h = 0.0;
    double departure_mean_hour = 0.0;  // 0 when the location is not departure-anchored
    std::vector<double> mode_weights;
    int first_active_day = 0;  // offset from start_date
};

// Deterministic under seed; sessions come out sorted by arrival.
std::vector<ChargingSession> gen_sessions(const SynthConfig& config);
std::vector<CarProfile> gen_car_profiles(const SynthConfig& config);

WeatherMap gen_weather(std::uint64_t seed, CivilDate start, CivilDate end);
CalendarInfo gen_calendar(CivilDate start, CivilDate end);

}  // namespace sessioncast
