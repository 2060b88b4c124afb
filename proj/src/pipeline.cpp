#include "sessioncast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sessioncast {

const char* to_string(IncrementalMode m) {
    return m == IncrementalMode::Growing ? "growing" : "replay";
}

Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw std::invalid_argument("compute_metrics: length mismatch or empty");
    }
    Metrics m;
    m.n = y_true.size();
    double sse = 0.0, sae = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        sse += e * e;
        sae += std::abs(e);
    }
    m.rmse = std::sqrt(sse / static_cast<double>(m.n));
    m.mae = sae / static_cast<double>(m.n);
    m.r2 = r2_score(y_true, y_pred);
    return m;
}

std::array<double, kNumBases> closest_model_stats(
    const std::array<std::vector<double>, kNumBases>& family_pred,
    std::span<const double> y_true) {
    std::array<double, kNumBases> credit{};
    const std::size_t n = y_true.size();
    for (std::size_t b = 0; b < kNumBases; ++b) {
        if (family_pred[b].size() != n) {
            throw std::invalid_argument("closest_model_stats: prediction length mismatch");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < kNumBases; ++b) {
            best = std::min(best, std::abs(family_pred[b][i] - y_true[i]));
        }
        std::size_t ties = 0;
        for (std::size_t b = 0; b < kNumBases; ++b) {
            if (std::abs(family_pred[b][i] - y_true[i]) <= best) ++ties;
        }
        for (std::size_t b = 0; b < kNumBases; ++b) {
            if (std::abs(family_pred[b][i] - y_true[i]) <= best) {
                credit[b] += 1.0 / static_cast<double>(ties);
            }
        }
    }
    for (auto& c : credit) c = n > 0 ? 100.0 * c / static_cast<double>(n) : 0.0;
    return credit;
}

SplitPlan dynamic_split(std::span<const ChargingSession> sessions, int iteration,
                        const RunSettings& settings) {
    if (sessions.empty()) throw std::invalid_argument("dynamic_split: no sessions");
    for (std::size_t i = 1; i < sessions.size(); ++i) {
        if (sessions[i].arrival < sessions[i - 1].arrival) {
            throw std::invalid_argument("dynamic_split: sessions must be sorted by arrival");
        }
    }
    const Timestamp origin = floor_to_day(sessions.front().arrival);
    SplitPlan plan;
    plan.iteration = iteration;
    plan.test_begin = origin + (static_cast<Timestamp>(settings.initial_window_days) +
                                7 * static_cast<Timestamp>(iteration)) *
                                   kSecondsPerDay;
    plan.test_end = plan.test_begin + kSecondsPerWeek;
    if (sessions.back().arrival < plan.test_begin) {
        throw std::runtime_error("dynamic_split: insufficient data horizon for iteration " +
                                 std::to_string(iteration));
    }
    plan.window_begin = origin;
    if (settings.lookback_days > 0) {
        plan.window_begin = std::max(
            origin, plan.test_begin - static_cast<Timestamp>(settings.lookback_days) * kSecondsPerDay);
    }

    std::vector<std::size_t> window_rows;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const Timestamp t = sessions[i].arrival;
        if (t >= plan.window_begin && t < plan.test_begin) window_rows.push_back(i);
        if (t >= plan.test_begin && t < plan.test_end) plan.test_rows.push_back(i);
    }

    if (settings.mode == IncrementalMode::Replay && window_rows.size() > settings.replay_cap) {
        plan.replay = true;
        const Timestamp week_ago = plan.test_begin - kSecondsPerWeek;
        std::vector<std::size_t> recent, older;
        for (auto r : window_rows) {
            (sessions[r].arrival >= week_ago ? recent : older).push_back(r);
        }
        const std::size_t budget =
            settings.replay_cap > recent.size() ? settings.replay_cap - recent.size() : 0;
        if (older.size() > budget) {
            std::mt19937_64 rng(
                mix_seed(settings.seed, 0x5e95ULL + static_cast<std::uint64_t>(iteration)));
            std::shuffle(older.begin(), older.end(), rng);
            older.resize(budget);
            std::sort(older.begin(), older.end());
        }
        window_rows = std::move(older);
        window_rows.insert(window_rows.end(), recent.begin(), recent.end());
        std::sort(window_rows.begin(), window_rows.end());
    }

    const std::size_t n = window_rows.size();
    const std::size_t val_count = n / 5;
    plan.train_rows.assign(window_rows.begin(),
                           window_rows.begin() + static_cast<std::ptrdiff_t>(n - val_count));
    plan.val_rows.assign(window_rows.begin() + static_cast<std::ptrdiff_t>(n - val_count),
                         window_rows.end());
    return plan;
}

RouteDecision route(const ChargingSession& session, const std::set<std::string>& known_cars,
                    int prior_count) {
    RouteDecision d;
    d.prior_sessions = prior_count;
    d.variant =
        known_cars.count(session.car_id) > 0 ? ModelVariant::Model2 : ModelVariant::Model1;
    return d;
}

namespace {

struct FittedVariant {
    VariantOutcome outcome;
    std::optional<StackedEnsemble> stack;
};

FittedVariant fit_variant(const std::vector<FeatureVector>& vectors, ModelVariant variant,
                          const RunSettings& settings, std::uint64_t seed_salt) {
    FittedVariant fv;
    VariantOutcome& out = fv.outcome;
    out.n_train = vectors.size();
    const std::size_t n = vectors.size();
    if (n < 4) return fv;

    const int k = static_cast<int>(std::clamp<std::size_t>(
        static_cast<std::size_t>(settings.cv_k), 2, n / 2));
    const CvPlan plan = CvPlan::contiguous(n, k);
    const Matrix x = feature_matrix(vectors);
    const std::vector<double> y = target_vector(vectors);
    const auto allowed_arr = variant_mask(variant);
    const std::vector<bool> allowed(allowed_arr.begin(), allowed_arr.end());

    FitContext ctx;
    ctx.seed = mix_seed(settings.seed, seed_salt);
    ctx.svr_row_cap = settings.svr_row_cap;

    std::array<BaseSpec, kNumBases> bases;
    for (std::size_t b = 0; b < kNumBases; ++b) {
        const Family family = kFamilies[b];
        const HyperGrid grid = default_grid(family, settings.profile);
        SelectionResult sel;
        if (n < settings.min_stratum_rows) {
            sel.params = first_grid_point(grid);
            sel.mask = allowed;
            sel.sfbs_skipped = true;
            out.small_stratum = true;
        } else {
            sel = tune_and_select(family, grid, x, y, plan, allowed, ctx);
        }
        bases[b] = BaseSpec{family, sel.params, sel.mask};
        out.selections[b] = std::move(sel);
    }

    // The meta matrix is tiny (five base forecasts plus the selected raw
    // features), so the combiner gets a heavily regularized stump-depth grid
    // instead of the base-model search space.
    HyperGrid meta_grid = settings.meta_grid;
    meta_grid.family = Family::Gbdt;
    if (meta_grid.axes.empty()) {
        meta_grid.axes = {{"n_rounds", {50, 100, 200}}, {"learning_rate", {0.02, 0.05}},
                          {"max_depth", {1, 2}},        {"subsample", {0.8}},
                          {"colsample", {1.0}},         {"min_split_loss", {0}}};
    }
    fv.stack = StackedEnsemble::fit(x, y, plan, bases, meta_grid, ctx);
    out.fitted = true;
    out.meta_params = fv.stack->meta_params();
    out.meta_importance = fv.stack->meta_importance();
    out.meta_feature_columns = fv.stack->meta_feature_columns();
    for (std::size_t b = 0; b < kNumBases; ++b) {
        const auto imp = fv.stack->base_model(b).feature_importance();
        if (!imp) continue;
        const auto& cols = fv.stack->base_columns(b);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out.base_importance[b][static_cast<std::size_t>(cols[c])] = (*imp)[c];
        }
    }
    return fv;
}

}  // namespace

WeeklyIterationResult run_week(std::span<const ChargingSession> sessions, const WeatherMap& weather,
                               const CalendarInfo& calendar, int iteration,
                               const RunSettings& settings) {
    WeeklyIterationResult week;
    week.plan = dynamic_split(sessions, iteration, settings);

    std::vector<std::size_t> pool = week.plan.train_rows;
    pool.insert(pool.end(), week.plan.val_rows.begin(), week.plan.val_rows.end());

    for (Location location : settings.locations) {
        for (Target target : settings.targets) {
            StratumResult stratum;
            stratum.location = location;
            stratum.target = target;

            std::vector<ChargingSession> train_sessions;
            for (auto r : pool) {
                if (sessions[r].location == location) train_sessions.push_back(sessions[r]);
            }
            std::vector<const ChargingSession*> test_sessions;
            for (auto r : week.plan.test_rows) {
                if (sessions[r].location == location) test_sessions.push_back(&sessions[r]);
            }
            if (train_sessions.empty() || test_sessions.empty()) {
                stratum.skipped = true;
                stratum.skip_reason = train_sessions.empty() ? "no training sessions in stratum"
                                                             : "no test sessions in stratum";
                week.strata.push_back(std::move(stratum));
                continue;
            }

            const HistoryIndex index(train_sessions, target, settings.utc_offset_hours);
            std::set<std::string> known_cars;
            for (const auto& s : train_sessions) known_cars.insert(s.car_id);

            std::vector<FeatureVector> m1_train, m2_train;
            m1_train.reserve(train_sessions.size());
            for (const auto& s : train_sessions) {
                m1_train.push_back(featurize(s, index, weather, calendar, ModelVariant::Model1));
                if (index.car(s.car_id, s.arrival).count >= 1) {
                    m2_train.push_back(featurize(s, index, weather, calendar, ModelVariant::Model2));
                }
            }

            const std::uint64_t stratum_salt =
                static_cast<std::uint64_t>(iteration) * 1000 +
                (location == Location::Workplace ? 0 : 100) + (target == Target::Energy ? 0 : 10);
            FittedVariant m1 = fit_variant(m1_train, ModelVariant::Model1, settings, stratum_salt + 1);
            FittedVariant m2 = fit_variant(m2_train, ModelVariant::Model2, settings, stratum_salt + 2);
            if (!m1.outcome.fitted) {
                stratum.skipped = true;
                stratum.skip_reason = "too few training sessions";
                week.strata.push_back(std::move(stratum));
                continue;
            }

            std::array<std::vector<double>, 2> variant_true, variant_pred;
            for (const auto* s : test_sessions) {
                RouteDecision decision = route(*s, known_cars, index.car(s->car_id, s->arrival).count);
                if (decision.variant == ModelVariant::Model2 && !m2.outcome.fitted) {
                    decision.variant = ModelVariant::Model1;  // degenerate stratum fallback
                }
                const FittedVariant& fitted =
                    decision.variant == ModelVariant::Model1 ? m1 : m2;
                const FeatureVector fv =
                    featurize(*s, index, weather, calendar, decision.variant);
                const Matrix row_matrix = feature_matrix(std::span(&fv, 1));
                const auto row = row_matrix.row(0);

                stratum.y_true.push_back(fv.target);
                stratum.ensemble_pred.push_back(fitted.stack->predict_one(row));
                for (std::size_t b = 0; b < kNumBases; ++b) {
                    stratum.family_pred[b].push_back(fitted.stack->base_predict_one(b, row));
                }
                stratum.routed_variant.push_back(decision.variant);
                const std::size_t v = decision.variant == ModelVariant::Model1 ? 0 : 1;
                variant_true[v].push_back(fv.target);
                variant_pred[v].push_back(stratum.ensemble_pred.back());
            }

            stratum.routed_model1 = variant_true[0].size();
            stratum.routed_model2 = variant_true[1].size();
            m1.outcome.n_test = stratum.routed_model1;
            m2.outcome.n_test = stratum.routed_model2;
            if (!variant_true[0].empty()) {
                m1.outcome.ensemble = compute_metrics(variant_true[0], variant_pred[0]);
            }
            if (!variant_true[1].empty()) {
                m2.outcome.ensemble = compute_metrics(variant_true[1], variant_pred[1]);
            }
            stratum.combined_ensemble = compute_metrics(stratum.y_true, stratum.ensemble_pred);
            for (std::size_t b = 0; b < kNumBases; ++b) {
                stratum.combined_family[b] = compute_metrics(stratum.y_true, stratum.family_pred[b]);
            }
            stratum.closest_pct = closest_model_stats(stratum.family_pred, stratum.y_true);
            stratum.model1 = std::move(m1.outcome);
            stratum.model2 = std::move(m2.outcome);
            week.strata.push_back(std::move(stratum));
        }
    }
    return week;
}

namespace {

void pool_cell(AggregateCell& cell, std::span<const WeeklyIterationResult> weeks,
               Location location, Target target) {
    std::vector<double> y, ens;
    std::array<std::vector<double>, kNumBases> fam;
    std::array<std::vector<double>, 2> v_true, v_pred;
    for (const auto& week : weeks) {
        for (const auto& s : week.strata) {
            if (s.skipped || s.location != location || s.target != target) continue;
            y.insert(y.end(), s.y_true.begin(), s.y_true.end());
            ens.insert(ens.end(), s.ensemble_pred.begin(), s.ensemble_pred.end());
            for (std::size_t b = 0; b < kNumBases; ++b) {
                fam[b].insert(fam[b].end(), s.family_pred[b].begin(), s.family_pred[b].end());
            }
            for (std::size_t i = 0; i < s.y_true.size(); ++i) {
                const std::size_t v = s.routed_variant[i] == ModelVariant::Model1 ? 0 : 1;
                v_true[v].push_back(s.y_true[i]);
                v_pred[v].push_back(s.ensemble_pred[i]);
            }
            cell.routed_model1 += s.routed_model1;
            cell.routed_model2 += s.routed_model2;
        }
    }
    if (y.empty()) return;
    cell.ensemble = compute_metrics(y, ens);
    for (std::size_t b = 0; b < kNumBases; ++b) cell.family[b] = compute_metrics(y, fam[b]);
    if (!v_true[0].empty()) cell.model1_ensemble = compute_metrics(v_true[0], v_pred[0]);
    if (!v_true[1].empty()) cell.model2_ensemble = compute_metrics(v_true[1], v_pred[1]);
    cell.closest_pct = closest_model_stats(fam, y);
}

}  // namespace

HorizonResult run_horizon(std::span<const ChargingSession> sessions, const WeatherMap& weather,
                          const CalendarInfo& calendar, int n_weeks, const RunSettings& settings) {
    if (n_weeks < 1) throw std::invalid_argument("run_horizon: n_weeks must be >= 1");
    HorizonResult result;
    for (int i = 0; i < n_weeks; ++i) {
        result.weeks.push_back(run_week(sessions, weather, calendar, i, settings));
    }
    for (Location location : settings.locations) {
        for (Target target : settings.targets) {
            AggregateCell cell;
            pool_cell(cell, result.weeks, location, target);
            result.aggregate.emplace(std::make_pair(location, target), std::move(cell));
        }
    }
    return result;
}

ImportanceAggregate aggregate_importance(std::span<const WeeklyIterationResult> weeks) {
    ImportanceAggregate agg;
    for (ModelVariant variant : {ModelVariant::Model1, ModelVariant::Model2}) {
        auto& slots = agg.features[variant];
        std::array<std::size_t, kNumFeatures> fits{}, selected{}, importance_fits{};
        std::array<double, kNumFeatures> importance_sum{};
        for (const auto& week : weeks) {
            for (const auto& s : week.strata) {
                if (s.skipped) continue;
                const VariantOutcome& out =
                    variant == ModelVariant::Model1 ? s.model1 : s.model2;
                if (!out.fitted) continue;
                const auto allowed = variant_mask(variant);
                for (std::size_t b = 0; b < kNumBases; ++b) {
                    const auto& mask = out.selections[b].mask;
                    const bool tree_based = kFamilies[b] == Family::Tree ||
                                            kFamilies[b] == Family::Forest ||
                                            kFamilies[b] == Family::Gbdt;
                    for (int f = 0; f < kNumFeatures; ++f) {
                        if (!allowed[f]) continue;
                        ++fits[f];
                        const bool in_mask =
                            f < static_cast<int>(mask.size()) && mask[static_cast<std::size_t>(f)];
                        if (in_mask) ++selected[f];
                        if (in_mask && tree_based) {
                            ++importance_fits[f];
                            importance_sum[f] += out.base_importance[b][static_cast<std::size_t>(f)];
                        }
                    }
                }
            }
        }
        for (int f = 0; f < kNumFeatures; ++f) {
            if (fits[f] > 0) {
                slots[f].selection_frequency =
                    static_cast<double>(selected[f]) / static_cast<double>(fits[f]);
            }
            if (importance_fits[f] > 0) {
                slots[f].mean_importance =
                    importance_sum[f] / static_cast<double>(importance_fits[f]);
            }
        }
    }

    std::array<double, kNumBases> base_sum{};
    std::size_t base_fits = 0;
    for (const auto& week : weeks) {
        for (const auto& s : week.strata) {
            if (s.skipped) continue;
            for (const VariantOutcome* out : {&s.model1, &s.model2}) {
                if (!out->fitted || out->meta_importance.size() < kNumBases) continue;
                ++base_fits;
                for (std::size_t b = 0; b < kNumBases; ++b) base_sum[b] += out->meta_importance[b];
            }
        }
    }
    for (std::size_t b = 0; b < kNumBases; ++b) {
        agg.bases[b].selection_frequency = base_fits > 0 ? 1.0 : 0.0;
        agg.bases[b].mean_importance =
            base_fits > 0 ? base_sum[b] / static_cast<double>(base_fits) : 0.0;
    }
    return agg;
}

std::map<int, HorizonResult> lookback_study(std::span<const ChargingSession> sessions,
                                            const WeatherMap& weather,
                                            const CalendarInfo& calendar,
                                            std::span<const int> window_days, int n_weeks,
                                            const RunSettings& settings) {
    if (window_days.empty()) throw std::invalid_argument("lookback_study: no windows");
    const int max_window = *std::max_element(window_days.begin(), window_days.end());
    RunSettings base = settings;
    base.initial_window_days = std::max(settings.initial_window_days, max_window);
    std::map<int, HorizonResult> results;
    for (int w : window_days) {
        RunSettings s = base;
        s.lookback_days = w;
        results.emplace(w, run_horizon(sessions, weather, calendar, n_weeks, s));
    }
    return results;
}

}  // namespace sessioncast
