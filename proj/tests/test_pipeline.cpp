#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sessioncast/pipeline.hpp"

using namespace sessioncast;

namespace {

SynthConfig tiny_config(std::uint64_t seed, int days) {
    SynthConfig c = default_synth_config();
    c.seed = seed;
    c.start_date = {2022, 1, 1};
    const std::int64_t end = days_from_civil(2022, 1, 1) + days;
    c.end_date = civil_from_days(end);
    c.workplace.n_cars = 6;
    c.residential.n_cars = 8;
    return c;
}

RunSettings quick_settings(std::uint64_t seed) {
    RunSettings s;
    s.seed = seed;
    s.cv_k = 2;
    s.initial_window_days = 28;
    s.min_stratum_rows = 100000;  // force the first-grid-point path: fast
    s.svr_row_cap = 200;
    return s;
}

}  // namespace

TEST_CASE("metrics identities on a hand fixture") {
    const std::vector<double> y = {1.0, 2.0, 3.0};
    const Metrics m = compute_metrics(y, std::vector<double>{2.0, 2.0, 2.0});
    CHECK(m.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(m.mae == doctest::Approx(2.0 / 3.0));
    CHECK(m.r2 == 0.0);  // mean predictor
    CHECK(m.n == 3);

    const Metrics perfect = compute_metrics(y, y);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.r2 == 1.0);

    // RMSE >= MAE always; both bound the largest error from below.
    const Metrics mixed = compute_metrics(y, std::vector<double>{1.5, 2.0, 4.0});
    CHECK(mixed.rmse >= mixed.mae);

    CHECK(compute_metrics(std::vector<double>{5.0, 5.0}, std::vector<double>{4.0, 6.0}).r2 == 0.0);
    CHECK_THROWS_AS(compute_metrics(y, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
}

TEST_CASE("closest model credit with tie sharing") {
    const std::vector<double> y = {10.0, 20.0, 30.0};
    std::array<std::vector<double>, kNumBases> pred;
    pred[0] = {10.0, 25.0, 40.0};  // wins row 0
    pred[1] = {15.0, 20.5, 40.0};  // wins row 1
    pred[2] = {15.0, 25.0, 31.0};  // ties row 2
    pred[3] = {15.0, 25.0, 29.0};  // ties row 2
    pred[4] = {15.0, 25.0, 40.0};
    const auto pct = closest_model_stats(pred, y);
    CHECK(pct[0] == doctest::Approx(100.0 / 3.0));
    CHECK(pct[1] == doctest::Approx(100.0 / 3.0));
    CHECK(pct[2] == doctest::Approx(100.0 / 6.0));
    CHECK(pct[3] == doctest::Approx(100.0 / 6.0));
    CHECK(pct[4] == 0.0);
    CHECK(pct[0] + pct[1] + pct[2] + pct[3] + pct[4] == doctest::Approx(100.0));

    pred[4] = {15.0, 25.0};
    CHECK_THROWS_AS(closest_model_stats(pred, y), std::invalid_argument);
}

TEST_CASE("dynamic split arithmetic") {
    const auto sessions = clean_sessions(gen_sessions(tiny_config(4, 49))).kept;
    RunSettings settings = quick_settings(4);

    const SplitPlan plan = dynamic_split(sessions, 0, settings);
    const Timestamp origin = floor_to_day(sessions.front().arrival);
    CHECK(plan.test_begin == origin + 28 * kSecondsPerDay);
    CHECK(plan.test_end == plan.test_begin + kSecondsPerWeek);
    CHECK(plan.window_begin == origin);
    CHECK(!plan.replay);
    CHECK(!plan.train_rows.empty());
    CHECK(!plan.test_rows.empty());
    for (auto r : plan.train_rows) CHECK(sessions[r].arrival < plan.test_begin);
    for (auto r : plan.val_rows) CHECK(sessions[r].arrival < plan.test_begin);
    for (auto r : plan.test_rows) {
        CHECK(sessions[r].arrival >= plan.test_begin);
        CHECK(sessions[r].arrival < plan.test_end);
    }
    // Validation is the last fifth of the window, after all training rows.
    const std::size_t window_n = plan.train_rows.size() + plan.val_rows.size();
    CHECK(plan.val_rows.size() == window_n / 5);
    if (!plan.val_rows.empty()) CHECK(plan.train_rows.back() < plan.val_rows.front());

    // The next iteration absorbs one more week.
    const SplitPlan next = dynamic_split(sessions, 1, settings);
    CHECK(next.test_begin == plan.test_begin + kSecondsPerWeek);
    CHECK(next.train_rows.size() + next.val_rows.size() > window_n);

    // Lookback truncation moves the window start, not the test block.
    settings.lookback_days = 14;
    const SplitPlan trunc = dynamic_split(sessions, 0, settings);
    CHECK(trunc.test_begin == plan.test_begin);
    CHECK(trunc.window_begin == plan.test_begin - 14 * kSecondsPerDay);
    for (auto r : trunc.train_rows) CHECK(sessions[r].arrival >= trunc.window_begin);
    CHECK(trunc.train_rows.size() + trunc.val_rows.size() < window_n);

    // Too deep an iteration runs past the data.
    settings.lookback_days = 0;
    CHECK_THROWS_AS(dynamic_split(sessions, 50, settings), std::runtime_error);
}

TEST_CASE("replay mode keeps the newest week and caps the rest") {
    const auto sessions = clean_sessions(gen_sessions(tiny_config(5, 49))).kept;
    RunSettings settings = quick_settings(5);
    settings.mode = IncrementalMode::Replay;
    settings.replay_cap = 60;

    const SplitPlan plan = dynamic_split(sessions, 0, settings);
    REQUIRE(plan.replay);
    const std::size_t window_n = plan.train_rows.size() + plan.val_rows.size();
    CHECK(window_n <= 60);

    // Every row of the last pre-test week must survive the subsampling.
    std::vector<std::size_t> kept = plan.train_rows;
    kept.insert(kept.end(), plan.val_rows.begin(), plan.val_rows.end());
    const Timestamp week_ago = plan.test_begin - kSecondsPerWeek;
    std::size_t recent_expected = 0, recent_kept = 0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (sessions[i].arrival >= week_ago && sessions[i].arrival < plan.test_begin) {
            ++recent_expected;
        }
    }
    for (auto r : kept) {
        if (sessions[r].arrival >= week_ago) ++recent_kept;
    }
    CHECK(recent_kept == recent_expected);

    // Same seed, same subsample; different seed, different subsample.
    CHECK(dynamic_split(sessions, 0, settings).train_rows == plan.train_rows);
    RunSettings other = settings;
    other.seed = 99;
    CHECK(dynamic_split(sessions, 0, other).train_rows != plan.train_rows);
}

TEST_CASE("routing by car familiarity") {
    ChargingSession s;
    s.car_id = "C7";
    CHECK(route(s, {"C1", "C7"}).variant == ModelVariant::Model2);
    CHECK(route(s, {"C1"}).variant == ModelVariant::Model1);
    CHECK(route(s, {}).variant == ModelVariant::Model1);
    CHECK(route(s, {"C7"}, 3).prior_sessions == 3);
}

TEST_CASE("run_week produces consistent strata and is deterministic") {
    const auto sessions = clean_sessions(gen_sessions(tiny_config(6, 42))).kept;
    const WeatherMap weather = gen_weather(6, {2022, 1, 1}, {2022, 2, 12});
    const CalendarInfo calendar = gen_calendar({2022, 1, 1}, {2022, 2, 12});
    RunSettings settings = quick_settings(6);
    settings.locations = {Location::Workplace};

    const WeeklyIterationResult week = run_week(sessions, weather, calendar, 0, settings);
    REQUIRE(week.strata.size() == 2);  // one location, both targets
    for (const auto& s : week.strata) {
        REQUIRE(!s.skipped);
        CHECK(s.model1.fitted);
        CHECK(s.model1.small_stratum);  // min_stratum_rows forces the cheap path
        CHECK(s.model1.selections[0].sfbs_skipped);
        CHECK(s.y_true.size() == s.ensemble_pred.size());
        CHECK(s.routed_model1 + s.routed_model2 == s.y_true.size());
        CHECK(s.combined_ensemble.n == s.y_true.size());
        double total = 0.0;
        for (double p : s.closest_pct) total += p;
        CHECK(total == doctest::Approx(100.0));
        // Model 1 masks the car-history slots, so they can carry no importance.
        CHECK(s.model1.base_importance[2][static_cast<int>(FeatureId::CarAvg)] == 0.0);
    }

    const WeeklyIterationResult again = run_week(sessions, weather, calendar, 0, settings);
    for (std::size_t i = 0; i < week.strata.size(); ++i) {
        CHECK(again.strata[i].ensemble_pred == week.strata[i].ensemble_pred);
        CHECK(again.strata[i].family_pred[1] == week.strata[i].family_pred[1]);
    }
}

TEST_CASE("horizon pooling matches the strata forecasts") {
    const auto sessions = clean_sessions(gen_sessions(tiny_config(7, 49))).kept;
    const WeatherMap weather = gen_weather(7, {2022, 1, 1}, {2022, 2, 19});
    const CalendarInfo calendar = gen_calendar({2022, 1, 1}, {2022, 2, 19});
    RunSettings settings = quick_settings(7);
    settings.locations = {Location::Residential};
    settings.targets = {Target::Energy};

    const HorizonResult hr = run_horizon(sessions, weather, calendar, 2, settings);
    CHECK(hr.weeks.size() == 2);
    const auto key = std::make_pair(Location::Residential, Target::Energy);
    REQUIRE(hr.aggregate.count(key) == 1);
    const AggregateCell& cell = hr.aggregate.at(key);

    std::vector<double> y, ens;
    for (const auto& w : hr.weeks) {
        for (const auto& s : w.strata) {
            if (s.skipped) continue;
            y.insert(y.end(), s.y_true.begin(), s.y_true.end());
            ens.insert(ens.end(), s.ensemble_pred.begin(), s.ensemble_pred.end());
        }
    }
    REQUIRE(!y.empty());
    const Metrics pooled = compute_metrics(y, ens);
    CHECK(cell.ensemble.n == pooled.n);
    CHECK(cell.ensemble.rmse == doctest::Approx(pooled.rmse));
    CHECK(cell.ensemble.r2 == doctest::Approx(pooled.r2));
    CHECK(cell.routed_model1 + cell.routed_model2 == pooled.n);

    const ImportanceAggregate agg = aggregate_importance(hr.weeks);
    for (const auto& [variant, slots] : agg.features) {
        for (const auto& slot : slots) {
            CHECK(slot.selection_frequency >= 0.0);
            CHECK(slot.selection_frequency <= 1.0);
        }
    }
    // Meta importance is normalized per fit, so base means sum to at most 1.
    double base_total = 0.0;
    for (const auto& b : agg.bases) base_total += b.mean_importance;
    CHECK(base_total <= 1.0 + 1e-9);

    CHECK_THROWS_AS(run_horizon(sessions, weather, calendar, 0, settings),
                    std::invalid_argument);
}

TEST_CASE("lookback study aligns test weeks across windows") {
    const auto sessions = clean_sessions(gen_sessions(tiny_config(8, 70))).kept;
    const WeatherMap weather = gen_weather(8, {2022, 1, 1}, {2022, 3, 12});
    const CalendarInfo calendar = gen_calendar({2022, 1, 1}, {2022, 3, 12});
    RunSettings settings = quick_settings(8);
    settings.locations = {Location::Workplace};
    settings.targets = {Target::Energy};

    const std::array<int, 2> windows = {28, 56};
    const auto results = lookback_study(sessions, weather, calendar, windows, 1, settings);
    REQUIRE(results.size() == 2);
    const SplitPlan& p28 = results.at(28).weeks[0].plan;
    const SplitPlan& p56 = results.at(56).weeks[0].plan;
    CHECK(p28.test_begin == p56.test_begin);  // same test block for every window
    CHECK(p28.test_rows == p56.test_rows);
    CHECK(p28.window_begin == p56.window_begin + 28 * kSecondsPerDay);
    CHECK(p28.train_rows.size() + p28.val_rows.size() <
          p56.train_rows.size() + p56.val_rows.size());

    CHECK_THROWS_AS(lookback_study(sessions, weather, calendar, std::span<const int>{}, 1,
                                   settings),
                    std::invalid_argument);
}
