#pragma once

#include <limits>
#include <span>
#include <vector>

#include "sessioncast/regressor.hpp"

namespace sessioncast {

enum class SplitCriterion { SquaredError, FriedmanMse, AbsoluteError };

const char* to_string(SplitCriterion c);

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::SquaredError;
    int max_depth = std::numeric_limits<int>::max();
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    double min_split_gain = 0.0;  // splits with criterion improvement below this are pruned
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction (mean, or median for absolute error)
    int count = 0;
};

// Greedy best-split CART. Operates directly on the matrix it is given; callers
// that want standardized inputs standardize first.
class CartTree {
public:
    // `row_indices` selects the training rows; `allowed_features` restricts the
    // split-candidate columns (empty = all columns). Tie-break on equal gain:
    // lowest feature index, then lowest threshold.
    void fit(const Matrix& x, std::span<const double> y, const TreeParams& params,
             std::span<const std::size_t> row_indices = {},
             std::span<const int> allowed_features = {});

    double predict_one(std::span<const double> row) const;

    // Total criterion improvement per column, unnormalized.
    std::vector<double> split_gains(std::size_t n_cols) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    nlohmann::json to_json() const;

private:
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<int, double>> gains_;  // (feature, improvement) per split
};

// Standalone decision-tree regressor (standardizes its inputs like every
// other family; thresholds live in standardized space).
class DecisionTreeModel final : public Regressor {
public:
    explicit DecisionTreeModel(TreeParams params) : params_(params) {}

    void fit(const Matrix& x, std::span<const double> y) override;
    double predict_one(std::span<const double> row) const override;
    std::optional<std::vector<double>> feature_importance() const override;
    nlohmann::json summary() const override;

    const CartTree& tree() const { return tree_; }

private:
    TreeParams params_;
    Standardizer standardizer_;
    CartTree tree_;
    std::size_t n_cols_ = 0;
};

}  // namespace sessioncast
