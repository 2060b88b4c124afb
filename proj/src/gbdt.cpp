#include "sessioncast/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sessioncast {

void GradientBoostedModel::fit(const Matrix& x, std::span<const double> y) {
    if (x.rows == 0) throw std::invalid_argument("GradientBoostedModel::fit: empty data");
    if (params_.n_rounds < 1 || params_.learning_rate <= 0.0 || params_.learning_rate > 1.0 ||
        params_.subsample <= 0.0 || params_.subsample > 1.0 || params_.colsample <= 0.0 ||
        params_.colsample > 1.0) {
        throw std::invalid_argument("GradientBoostedModel: invalid hyperparameters");
    }
    n_cols_ = x.cols;
    standardizer_.fit(x);
    const Matrix xs = standardizer_.transform(x);
    const std::size_t n = x.rows;

    base_score_ = 0.0;
    for (double v : y) base_score_ += v;
    base_score_ /= static_cast<double>(n);

    std::vector<double> pred(n, base_score_);
    std::vector<double> residual(n);

    TreeParams tree_params;
    tree_params.criterion = SplitCriterion::SquaredError;
    tree_params.max_depth = params_.max_depth;
    tree_params.min_split_gain = params_.min_split_loss;

    trees_.clear();
    round_mse_.clear();
    trees_.reserve(static_cast<std::size_t>(params_.n_rounds));

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::vector<int> all_cols(x.cols);
    std::iota(all_cols.begin(), all_cols.end(), 0);

    for (int t = 0; t < params_.n_rounds; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];

        std::mt19937_64 rng(mix_seed(params_.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows = all_rows;
        if (params_.subsample < 1.0) {
            const std::size_t keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params_.subsample * static_cast<double>(n))));
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(keep);
            std::sort(rows.begin(), rows.end());
        }
        std::vector<int> cols = all_cols;
        if (params_.colsample < 1.0) {
            const std::size_t keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::floor(params_.colsample * static_cast<double>(x.cols))));
            std::shuffle(cols.begin(), cols.end(), rng);
            cols.resize(keep);
            std::sort(cols.begin(), cols.end());
        }

        CartTree tree;
        tree.fit(xs, residual, tree_params, rows, cols);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] += params_.learning_rate * tree.predict_one(xs.row(i));
        }
        trees_.push_back(std::move(tree));

        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - pred[i];
            sse += d * d;
        }
        round_mse_.push_back(sse / static_cast<double>(n));
    }
}

double GradientBoostedModel::predict_one(std::span<const double> row) const {
    std::vector<double> z(row.size());
    standardizer_.transform_row(row, z);
    double p = base_score_;
    for (const auto& tree : trees_) p += params_.learning_rate * tree.predict_one(z);
    return p;
}

std::optional<std::vector<double>> GradientBoostedModel::feature_importance() const {
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

nlohmann::json GradientBoostedModel::summary() const {
    return {{"model", "gradient_boosting"},
            {"version", 1},
            {"n_rounds", params_.n_rounds},
            {"learning_rate", params_.learning_rate},
            {"max_depth", params_.max_depth},
            {"base_score", base_score_}};
}

}  // namespace sessioncast
