#pragma once

#include <set>

#include "sessioncast/features.hpp"
#include "sessioncast/stacking.hpp"
#include "sessioncast/synthgen.hpp"

namespace sessioncast {

enum class IncrementalMode { Growing, Replay };

const char* to_string(IncrementalMode m);

struct RunSettings {
    std::uint64_t seed = 1;
    int cv_k = 5;
    GridProfile profile = GridProfile::Fast;
    int utc_offset_hours = 1;
    int initial_window_days = 365;
    std::size_t svr_row_cap = 5000;
    std::size_t min_stratum_rows = 50;  // below this: first grid point, no SFBS
    IncrementalMode mode = IncrementalMode::Growing;
    std::size_t replay_cap = 5000;
    int lookback_days = 0;  // 0 = unlimited (growing window)
    std::vector<Location> locations = {Location::Workplace, Location::Residential};
    std::vector<Target> targets = {Target::Energy, Target::Duration};
    HyperGrid meta_grid;  // empty axes = built-in stacking default
};

struct Metrics {
    double rmse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

// Standard definitions; constant y_true scores R^2 = 0 by convention.
Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

// Fraction of rows on which each family's forecast is closest to the truth,
// in percent; ties share credit equally. Family order = kFamilies.
std::array<double, kNumBases> closest_model_stats(
    const std::array<std::vector<double>, kNumBases>& family_pred, std::span<const double> y_true);

struct SplitPlan {
    int iteration = 0;
    Timestamp window_begin = 0;
    Timestamp test_begin = 0;
    Timestamp test_end = 0;
    std::vector<std::size_t> train_rows;  // chronological; excludes validation
    std::vector<std::size_t> val_rows;    // last 20% of the window by row count
    std::vector<std::size_t> test_rows;
    bool replay = false;
};

// Growing-window weekly split: iteration 0 trains on the initial window and
// tests on the following 7 x 24 h block; each iteration absorbs one more week.
// Replay mode keeps the newest week plus a seeded uniform sample of older rows.
SplitPlan dynamic_split(std::span<const ChargingSession> sessions, int iteration,
                        const RunSettings& settings);

struct RouteDecision {
    ModelVariant variant = ModelVariant::Model1;
    int prior_sessions = 0;
};

RouteDecision route(const ChargingSession& session, const std::set<std::string>& known_cars,
                    int prior_count = 0);

struct VariantOutcome {
    bool fitted = false;
    bool small_stratum = false;  // first grid point, SFBS skipped
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::array<SelectionResult, kNumBases> selections;
    std::array<std::array<double, kNumFeatures>, kNumBases> base_importance{};  // 15-slot space
    std::vector<double> meta_importance;  // 5 base cols then meta_feature_columns
    std::vector<int> meta_feature_columns;
    ParamMap meta_params;
    Metrics ensemble;  // over this variant's routed test rows
};

struct StratumResult {
    Location location = Location::Residential;
    Target target = Target::Energy;
    bool skipped = false;
    std::string skip_reason;
    VariantOutcome model1;
    VariantOutcome model2;
    std::size_t routed_model1 = 0;
    std::size_t routed_model2 = 0;
    Metrics combined_ensemble;  // Model 1 + Model 2 forecasts pooled
    std::array<Metrics, kNumBases> combined_family;
    std::array<double, kNumBases> closest_pct{};
    // Raw test forecasts, kept for horizon-level pooling.
    std::vector<double> y_true;
    std::vector<double> ensemble_pred;
    std::array<std::vector<double>, kNumBases> family_pred;
    std::vector<ModelVariant> routed_variant;
};

struct WeeklyIterationResult {
    SplitPlan plan;
    std::vector<StratumResult> strata;
};

WeeklyIterationResult run_week(std::span<const ChargingSession> sessions, const WeatherMap& weather,
                               const CalendarInfo& calendar, int iteration,
                               const RunSettings& settings);

struct AggregateCell {
    Metrics ensemble;
    std::array<Metrics, kNumBases> family;
    Metrics model1_ensemble;
    Metrics model2_ensemble;
    std::array<double, kNumBases> closest_pct{};
    std::size_t routed_model1 = 0;
    std::size_t routed_model2 = 0;
};

struct HorizonResult {
    std::vector<WeeklyIterationResult> weeks;
    // Pooled over all test forecasts of the horizon, keyed (location, target).
    std::map<std::pair<Location, Target>, AggregateCell> aggregate;
};

HorizonResult run_horizon(std::span<const ChargingSession> sessions, const WeatherMap& weather,
                          const CalendarInfo& calendar, int n_weeks, const RunSettings& settings);

struct FeatureAggregate {
    double selection_frequency = 0.0;  // fraction of (week, family) fits selecting it
    double mean_importance = 0.0;      // over tree-based fits where selected; 0 if never
};

struct ImportanceAggregate {
    // Per variant, per feature slot.
    std::map<ModelVariant, std::array<FeatureAggregate, kNumFeatures>> features;
    // Per base model column in the meta learner.
    std::array<FeatureAggregate, kNumBases> bases;
};

ImportanceAggregate aggregate_importance(std::span<const WeeklyIterationResult> weeks);

// Train-window study: reruns the horizon with the train+validation window
// truncated to each lookback size. The initial window is pushed out to the
// largest requested size so every window sees the same test weeks.
std::map<int, HorizonResult> lookback_study(std::span<const ChargingSession> sessions,
                                            const WeatherMap& weather,
                                            const CalendarInfo& calendar,
                                            std::span<const int> window_days, int n_weeks,
                                            const RunSettings& settings);

inline constexpr std::array<int, 7> kDefaultLookbackWindows = {60, 160, 260, 360, 460, 560, 660};

}  // namespace sessioncast
