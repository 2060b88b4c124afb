#include "sessioncast/forest.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

namespace sessioncast {

void RandomForestModel::fit(const Matrix& x, std::span<const double> y) {
    if (x.rows == 0) throw std::invalid_argument("RandomForestModel::fit: empty data");
    if (params_.n_trees < 1) throw std::invalid_argument("RandomForestModel: n_trees must be >= 1");
    n_cols_ = x.cols;
    standardizer_.fit(x);
    const Matrix xs = standardizer_.transform(x);

    TreeParams tree_params;
    tree_params.criterion = SplitCriterion::SquaredError;
    tree_params.max_depth = params_.max_depth;
    tree_params.min_samples_split = params_.min_samples_split;
    tree_params.min_samples_leaf = params_.min_samples_leaf;

    trees_.assign(static_cast<std::size_t>(params_.n_trees), CartTree{});
    for (int t = 0; t < params_.n_trees; ++t) {
        std::vector<std::size_t> rows(x.rows);
        if (params_.bootstrap) {
            std::mt19937_64 rng(mix_seed(params_.seed, static_cast<std::uint64_t>(t)));
            std::uniform_int_distribution<std::size_t> pick(0, x.rows - 1);
            for (auto& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        trees_[static_cast<std::size_t>(t)].fit(xs, y, tree_params, rows);
    }
}

double RandomForestModel::predict_one(std::span<const double> row) const {
    std::vector<double> z(row.size());
    standardizer_.transform_row(row, z);
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict_one(z);
    return sum / static_cast<double>(trees_.size());
}

std::optional<std::vector<double>> RandomForestModel::feature_importance() const {
    std::vector<double> gains(n_cols_, 0.0);
    for (const auto& tree : trees_) {
        const auto g = tree.split_gains(n_cols_);
        for (std::size_t c = 0; c < n_cols_; ++c) gains[c] += g[c];
    }
    const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    if (total > 0.0) {
        for (auto& g : gains) g /= total;
    }
    return gains;
}

nlohmann::json RandomForestModel::summary() const {
    return {{"model", "random_forest"},
            {"version", 1},
            {"n_trees", params_.n_trees},
            {"max_depth", params_.max_depth},
            {"bootstrap", params_.bootstrap}};
}

}  // namespace sessioncast
