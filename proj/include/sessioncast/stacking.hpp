#pragma once

#include <array>
#include <functional>

#include "sessioncast/tuning.hpp"

namespace sessioncast {

struct BaseSpec {
    Family family = Family::Linear;
    ParamMap params;
    std::vector<bool> mask;  // selected original features for this base
};

using BaseFactory =
    std::function<std::unique_ptr<Regressor>(Family, const ParamMap&, const FitContext&)>;

inline constexpr std::size_t kNumBases = 5;  // LR, SVR, DT, RF, XGB, in that order

// Stacking ensemble: a boosted-tree meta-learner over the five base models'
// forecasts concatenated with the original features. Meta training inputs are
// out-of-fold base forecasts so the meta model never sees in-sample fits.
class StackedEnsemble {
public:
    // `x` carries all original feature columns; each base trains on its own
    // masked subset. The meta model sees [5 base forecasts] ++ x[union of base
    // masks]. `factory` is a test hook for injecting synthetic bases.
    static StackedEnsemble fit(const Matrix& x, std::span<const double> y, const CvPlan& plan,
                               const std::array<BaseSpec, kNumBases>& bases,
                               const HyperGrid& meta_grid, const FitContext& ctx,
                               const BaseFactory& factory = nullptr);

    double predict_one(std::span<const double> row) const;
    std::vector<double> predict(const Matrix& x) const;

    // Forecast of one base model (refit on all rows), for closest-model stats.
    double base_predict_one(std::size_t base, std::span<const double> row) const;

    const std::array<BaseSpec, kNumBases>& base_specs() const { return specs_; }
    const Regressor& base_model(std::size_t base) const { return *base_models_[base]; }
    const std::vector<int>& base_columns(std::size_t base) const { return base_cols_[base]; }
    const ParamMap& meta_params() const { return meta_params_; }
    double meta_cv_score() const { return meta_cv_score_; }
    const std::vector<int>& meta_feature_columns() const { return union_cols_; }
    const Matrix& oof_matrix() const { return oof_; }  // n x 5, fit-time base forecasts

    // Meta-model importance: first 5 entries are the base-forecast columns,
    // the rest follow meta_feature_columns(); normalized to sum 1.
    std::vector<double> meta_importance() const;

    nlohmann::json summary() const;

private:
    std::array<BaseSpec, kNumBases> specs_;
    std::array<std::unique_ptr<Regressor>, kNumBases> base_models_;
    std::array<std::vector<int>, kNumBases> base_cols_;
    std::vector<int> union_cols_;
    std::unique_ptr<Regressor> meta_model_;
    ParamMap meta_params_;
    double meta_cv_score_ = 0.0;
    Matrix oof_;

    std::vector<double> assemble_meta_row(std::span<const double> row) const;
};

}  // namespace sessioncast
