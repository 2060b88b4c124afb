#pragma once

#include <cstdint>

#include "sessioncast/tree.hpp"

namespace sessioncast {

struct GbdtParams {
    int n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double subsample = 1.0;        // row fraction per round, sampled without replacement
    double colsample = 1.0;        // feature fraction per tree
    double min_split_loss = 0.0;   // minimum criterion improvement to keep a split
    std::uint64_t seed = 0;
};

// Squared-error gradient boosting: each round fits a depth-limited CART to the
// current residuals; prediction = base score + learning_rate * sum of trees.
class GradientBoostedModel final : public Regressor {
public:
    explicit GradientBoostedModel(GbdtParams params) : params_(params) {}

    void fit(const Matrix& x, std::span<const double> y) override;
    double predict_one(std::span<const double> row) const override;
    std::optional<std::vector<double>> feature_importance() const override;
    nlohmann::json summary() const override;

    double base_score() const { return base_score_; }
    const std::vector<CartTree>& trees() const { return trees_; }

    // Training MSE after each boosting round (on the full training set).
    const std::vector<double>& round_mse() const { return round_mse_; }

private:
    GbdtParams params_;
    Standardizer standardizer_;
    double base_score_ = 0.0;
    std::vector<CartTree> trees_;
    std::vector<double> round_mse_;
    std::size_t n_cols_ = 0;
};

}  // namespace sessioncast
