#pragma once

#include <cstdint>

#include "sessioncast/tree.hpp"

namespace sessioncast {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 5;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;
    bool bootstrap = true;  // test hook; production forests always resample
};

// Bagged CART ensemble. The per-split feature pool is all features; the
// prediction is the plain mean over trees.
class RandomForestModel final : public Regressor {
public:
    explicit RandomForestModel(ForestParams params) : params_(params) {}

    void fit(const Matrix& x, std::span<const double> y) override;
    double predict_one(std::span<const double> row) const override;
    std::optional<std::vector<double>> feature_importance() const override;
    nlohmann::json summary() const override;

    const std::vector<CartTree>& trees() const { return trees_; }

private:
    ForestParams params_;
    Standardizer standardizer_;
    std::vector<CartTree> trees_;
    std::size_t n_cols_ = 0;
};

}  // namespace sessioncast
