#include "sessioncast/report.hpp"

#include <fstream>
#include <sstream>

namespace sessioncast {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

nlohmann::json selection_json(const SelectionResult& sel) {
    nlohmann::json j;
    j["params"] = sel.params;
    j["cv_score"] = sel.cv_score;
    j["full_mask_cv"] = sel.full_mask_cv;
    j["stage1_cv"] = sel.stage1_cv;
    j["sfbs_skipped"] = sel.sfbs_skipped;
    j["trajectory"] = sel.trajectory;
    std::vector<std::string> selected;
    for (std::size_t f = 0; f < sel.mask.size(); ++f) {
        if (sel.mask[f]) selected.push_back(feature_name(static_cast<FeatureId>(f)));
    }
    j["selected_features"] = selected;
    return j;
}

nlohmann::json variant_json(const VariantOutcome& out) {
    nlohmann::json j;
    j["fitted"] = out.fitted;
    j["small_stratum"] = out.small_stratum;
    j["n_train"] = out.n_train;
    j["n_test"] = out.n_test;
    if (!out.fitted) return j;
    nlohmann::json bases;
    for (std::size_t b = 0; b < kNumBases; ++b) {
        bases[to_string(kFamilies[b])] = selection_json(out.selections[b]);
    }
    j["bases"] = bases;
    j["meta_params"] = out.meta_params;
    j["meta_importance"] = out.meta_importance;
    if (out.n_test > 0) j["ensemble"] = metrics_json(out.ensemble);
    return j;
}

nlohmann::json cell_json(const AggregateCell& cell) {
    nlohmann::json j;
    j["ensemble"] = metrics_json(cell.ensemble);
    nlohmann::json fam, closest;
    for (std::size_t b = 0; b < kNumBases; ++b) {
        fam[to_string(kFamilies[b])] = metrics_json(cell.family[b]);
        closest[to_string(kFamilies[b])] = cell.closest_pct[b];
    }
    j["base_models"] = fam;
    j["closest_model_pct"] = closest;
    j["routed_model1"] = cell.routed_model1;
    j["routed_model2"] = cell.routed_model2;
    if (cell.routed_model1 > 0) j["model1_ensemble"] = metrics_json(cell.model1_ensemble);
    if (cell.routed_model2 > 0) j["model2_ensemble"] = metrics_json(cell.model2_ensemble);
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

nlohmann::json metrics_json(const Metrics& m) {
    return {{"rmse", m.rmse}, {"mae", m.mae}, {"r2", m.r2}, {"n", m.n}};
}

nlohmann::json weekly_json(const WeeklyIterationResult& week) {
    nlohmann::json j;
    j["iteration"] = week.plan.iteration;
    j["window_begin"] = format_iso8601(week.plan.window_begin);
    j["test_begin"] = format_iso8601(week.plan.test_begin);
    j["test_end"] = format_iso8601(week.plan.test_end);
    j["n_train"] = week.plan.train_rows.size();
    j["n_val"] = week.plan.val_rows.size();
    j["n_test"] = week.plan.test_rows.size();
    j["replay"] = week.plan.replay;
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& s : week.strata) {
        nlohmann::json sj;
        sj["location"] = to_string(s.location);
        sj["target"] = to_string(s.target);
        if (s.skipped) {
            sj["skipped"] = true;
            sj["skip_reason"] = s.skip_reason;
            strata.push_back(std::move(sj));
            continue;
        }
        sj["skipped"] = false;
        sj["model1"] = variant_json(s.model1);
        sj["model2"] = variant_json(s.model2);
        sj["routed_model1"] = s.routed_model1;
        sj["routed_model2"] = s.routed_model2;
        sj["ensemble"] = metrics_json(s.combined_ensemble);
        nlohmann::json fam, closest;
        for (std::size_t b = 0; b < kNumBases; ++b) {
            fam[to_string(kFamilies[b])] = metrics_json(s.combined_family[b]);
            closest[to_string(kFamilies[b])] = s.closest_pct[b];
        }
        sj["base_models"] = fam;
        sj["closest_model_pct"] = closest;
        strata.push_back(std::move(sj));
    }
    j["strata"] = std::move(strata);
    return j;
}

nlohmann::json horizon_json(const HorizonResult& result) {
    nlohmann::json j;
    nlohmann::json weeks = nlohmann::json::array();
    for (const auto& week : result.weeks) weeks.push_back(weekly_json(week));
    j["weeks"] = std::move(weeks);
    nlohmann::json agg;
    for (const auto& [key, cell] : result.aggregate) {
        agg[std::string(to_string(key.first)) + "/" + to_string(key.second)] = cell_json(cell);
    }
    j["aggregate"] = std::move(agg);
    return j;
}

std::string metrics_csv(const HorizonResult& result) {
    std::ostringstream out;
    out << "location,target,model,rmse,mae,r2,n\n";
    for (const auto& [key, cell] : result.aggregate) {
        const std::string prefix =
            std::string(to_string(key.first)) + "," + to_string(key.second) + ",";
        auto emit = [&](const std::string& model, const Metrics& m) {
            out << prefix << model << "," << fmt(m.rmse) << "," << fmt(m.mae) << ","
                << fmt(m.r2) << "," << m.n << "\n";
        };
        emit("ensemble", cell.ensemble);
        for (std::size_t b = 0; b < kNumBases; ++b) emit(to_string(kFamilies[b]), cell.family[b]);
        if (cell.routed_model1 > 0) emit("ensemble_model1", cell.model1_ensemble);
        if (cell.routed_model2 > 0) emit("ensemble_model2", cell.model2_ensemble);
    }
    return out.str();
}

std::string closest_model_csv(const HorizonResult& result) {
    std::ostringstream out;
    out << "location,target,model,closest_pct\n";
    for (const auto& [key, cell] : result.aggregate) {
        for (std::size_t b = 0; b < kNumBases; ++b) {
            out << to_string(key.first) << "," << to_string(key.second) << ","
                << to_string(kFamilies[b]) << "," << fmt(cell.closest_pct[b]) << "\n";
        }
    }
    return out.str();
}

std::string feature_csv(const ImportanceAggregate& agg) {
    std::ostringstream out;
    out << "variant,feature,selection_frequency,mean_importance\n";
    for (ModelVariant variant : {ModelVariant::Model1, ModelVariant::Model2}) {
        const auto it = agg.features.find(variant);
        if (it == agg.features.end()) continue;
        for (int f = 0; f < kNumFeatures; ++f) {
            out << to_string(variant) << "," << feature_name(static_cast<FeatureId>(f)) << ","
                << fmt(it->second[static_cast<std::size_t>(f)].selection_frequency) << ","
                << fmt(it->second[static_cast<std::size_t>(f)].mean_importance) << "\n";
        }
    }
    return out.str();
}

std::string base_model_csv(const ImportanceAggregate& agg) {
    std::ostringstream out;
    out << "model,selection_frequency,mean_importance\n";
    for (std::size_t b = 0; b < kNumBases; ++b) {
        out << to_string(kFamilies[b]) << "," << fmt(agg.bases[b].selection_frequency) << ","
            << fmt(agg.bases[b].mean_importance) << "\n";
    }
    return out.str();
}

std::string lookback_csv(const std::map<int, HorizonResult>& study) {
    std::ostringstream out;
    out << "window_days,location,target,rmse,mae,r2,n\n";
    for (const auto& [window, result] : study) {
        for (const auto& [key, cell] : result.aggregate) {
            out << window << "," << to_string(key.first) << "," << to_string(key.second) << ","
                << fmt(cell.ensemble.rmse) << "," << fmt(cell.ensemble.mae) << ","
                << fmt(cell.ensemble.r2) << "," << cell.ensemble.n << "\n";
        }
    }
    return out.str();
}

void write_run_report(const std::filesystem::path& out_dir, const HorizonResult& result,
                      const nlohmann::json& config_echo) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json report = horizon_json(result);
    report["config"] = config_echo;
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    for (const auto& week : result.weeks) {
        char name[32];
        std::snprintf(name, sizeof(name), "week_%03d.json", week.plan.iteration);
        write_text(out_dir / name, weekly_json(week).dump(2) + "\n");
    }
    write_text(out_dir / "metrics.csv", metrics_csv(result));
    write_text(out_dir / "closest_models.csv", closest_model_csv(result));
    const ImportanceAggregate agg = aggregate_importance(result.weeks);
    write_text(out_dir / "feature_importance.csv", feature_csv(agg));
    write_text(out_dir / "base_models.csv", base_model_csv(agg));
}

void write_lookback_report(const std::filesystem::path& out_dir,
                           const std::map<int, HorizonResult>& study,
                           const nlohmann::json& config_echo) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json report;
    report["config"] = config_echo;
    nlohmann::json windows;
    for (const auto& [window, result] : study) {
        nlohmann::json agg;
        for (const auto& [key, cell] : result.aggregate) {
            agg[std::string(to_string(key.first)) + "/" + to_string(key.second)] =
                metrics_json(cell.ensemble);
        }
        windows[std::to_string(window)] = std::move(agg);
    }
    report["windows"] = std::move(windows);
    write_text(out_dir / "lookback.json", report.dump(2) + "\n");
    write_text(out_dir / "lookback.csv", lookback_csv(study));
}

}  // namespace sessioncast
