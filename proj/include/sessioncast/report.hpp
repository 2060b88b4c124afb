#pragma once

#include <filesystem>

#include "sessioncast/pipeline.hpp"

namespace sessioncast {

nlohmann::json metrics_json(const Metrics& m);
nlohmann::json weekly_json(const WeeklyIterationResult& week);
nlohmann::json horizon_json(const HorizonResult& result);

std::string metrics_csv(const HorizonResult& result);
std::string closest_model_csv(const HorizonResult& result);
std::string feature_csv(const ImportanceAggregate& agg);
std::string base_model_csv(const ImportanceAggregate& agg);
std::string lookback_csv(const std::map<int, HorizonResult>& study);

// Writes run artifacts under `out_dir` (created if absent): report.json,
// metrics.csv, closest_models.csv, feature_importance.csv, base_models.csv.
// `config_echo` is embedded verbatim in report.json.
void write_run_report(const std::filesystem::path& out_dir, const HorizonResult& result,
                      const nlohmann::json& config_echo);

// Writes lookback.json and lookback.csv under `out_dir`.
void write_lookback_report(const std::filesystem::path& out_dir,
                           const std::map<int, HorizonResult>& study,
                           const nlohmann::json& config_echo);

}  // namespace sessioncast
