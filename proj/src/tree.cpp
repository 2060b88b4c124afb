#include "sessioncast/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace sessioncast {

const char* to_string(SplitCriterion c) {
    switch (c) {
        case SplitCriterion::SquaredError: return "squared_error";
        case SplitCriterion::FriedmanMse: return "friedman_mse";
        case SplitCriterion::AbsoluteError: return "absolute_error";
    }
    return "?";
}

namespace {

// cost[i] = min_m sum_{j<i} |v[j] - m|, i.e. absolute deviation around the
// median of the first i scanned values. Two-heap running median with sums.
std::vector<double> prefix_abs_deviation(std::span<const double> values) {
    std::priority_queue<double> low;  // max-heap
    std::priority_queue<double, std::vector<double>, std::greater<>> high;
    double sum_low = 0.0, sum_high = 0.0;
    std::vector<double> cost(values.size() + 1, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (low.empty() || v <= low.top()) {
            low.push(v);
            sum_low += v;
        } else {
            high.push(v);
            sum_high += v;
        }
        if (low.size() > high.size() + 1) {
            const double t = low.top();
            low.pop();
            sum_low -= t;
            high.push(t);
            sum_high += t;
        } else if (high.size() > low.size()) {
            const double t = high.top();
            high.pop();
            sum_high -= t;
            low.push(t);
            sum_low += t;
        }
        const double med = low.top();
        const double n_low = static_cast<double>(low.size());
        const double n_high = static_cast<double>(high.size());
        cost[i + 1] = (sum_high - sum_low) + med * (n_low - n_high);
    }
    return cost;
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

struct SplitCandidate {
    bool valid = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
};

}  // namespace

void CartTree::fit(const Matrix& x, std::span<const double> y, const TreeParams& params,
                   std::span<const std::size_t> row_indices, std::span<const int> allowed_features) {
    nodes_.clear();
    gains_.clear();
    std::vector<std::size_t> all_rows;
    if (row_indices.empty()) {
        all_rows.resize(x.rows);
        std::iota(all_rows.begin(), all_rows.end(), 0);
        row_indices = all_rows;
    }
    if (row_indices.empty()) throw std::invalid_argument("CartTree::fit: empty training data");
    std::vector<int> all_features;
    if (allowed_features.empty()) {
        all_features.resize(x.cols);
        std::iota(all_features.begin(), all_features.end(), 0);
        allowed_features = all_features;
    }

    struct WorkItem {
        std::vector<std::size_t> rows;
        int depth;
        int node_index;
    };

    auto leaf_value = [&](const std::vector<std::size_t>& rows) {
        if (params.criterion == SplitCriterion::AbsoluteError) {
            std::vector<double> vals;
            vals.reserve(rows.size());
            for (auto r : rows) vals.push_back(y[r]);
            return median_of(std::move(vals));
        }
        double s = 0.0;
        for (auto r : rows) s += y[r];
        return s / static_cast<double>(rows.size());
    };

    auto find_split = [&](const std::vector<std::size_t>& rows) {
        SplitCandidate best;
        const std::size_t n = rows.size();
        const double nd = static_cast<double>(n);
        const int min_leaf = params.min_samples_leaf;

        double parent_cost = 0.0;
        if (params.criterion != SplitCriterion::FriedmanMse) {
            if (params.criterion == SplitCriterion::SquaredError) {
                double s = 0.0, s2 = 0.0;
                for (auto r : rows) {
                    s += y[r];
                    s2 += y[r] * y[r];
                }
                parent_cost = s2 - s * s / nd;
            } else {
                std::vector<double> vals;
                vals.reserve(n);
                for (auto r : rows) vals.push_back(y[r]);
                parent_cost = prefix_abs_deviation(vals).back();
            }
        }

        std::vector<std::size_t> order(rows);
        std::vector<double> sorted_y(n);
        for (int f : allowed_features) {
            const std::size_t fc = static_cast<std::size_t>(f);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x.at(a, fc) < x.at(b, fc);
            });
            for (std::size_t i = 0; i < n; ++i) sorted_y[i] = y[order[i]];

            std::vector<double> pre_l1, suf_l1;
            if (params.criterion == SplitCriterion::AbsoluteError) {
                pre_l1 = prefix_abs_deviation(sorted_y);
                std::vector<double> rev(sorted_y.rbegin(), sorted_y.rend());
                suf_l1 = prefix_abs_deviation(rev);
            }

            double sum_l = 0.0, sumsq_l = 0.0;
            double sum_total = 0.0, sumsq_total = 0.0;
            for (double v : sorted_y) {
                sum_total += v;
                sumsq_total += v * v;
            }

            for (std::size_t i = 1; i < n; ++i) {
                sum_l += sorted_y[i - 1];
                sumsq_l += sorted_y[i - 1] * sorted_y[i - 1];
                const double xv_l = x.at(order[i - 1], fc);
                const double xv_r = x.at(order[i], fc);
                if (!(xv_l < xv_r)) continue;
                const std::size_t n_l = i, n_r = n - i;
                if (n_l < static_cast<std::size_t>(min_leaf) ||
                    n_r < static_cast<std::size_t>(min_leaf)) {
                    continue;
                }
                double gain = 0.0;
                switch (params.criterion) {
                    case SplitCriterion::SquaredError: {
                        const double sse_l = sumsq_l - sum_l * sum_l / static_cast<double>(n_l);
                        const double sum_r = sum_total - sum_l;
                        const double sse_r = (sumsq_total - sumsq_l) -
                                             sum_r * sum_r / static_cast<double>(n_r);
                        gain = parent_cost - (sse_l + sse_r);
                        break;
                    }
                    case SplitCriterion::FriedmanMse: {
                        const double mean_l = sum_l / static_cast<double>(n_l);
                        const double mean_r = (sum_total - sum_l) / static_cast<double>(n_r);
                        const double diff = mean_l - mean_r;
                        gain = static_cast<double>(n_l) * static_cast<double>(n_r) / nd * diff * diff;
                        break;
                    }
                    case SplitCriterion::AbsoluteError:
                        gain = parent_cost - (pre_l1[i] + suf_l1[n - i]);
                        break;
                }
                if (gain > best.gain) {
                    best.valid = true;
                    best.feature = f;
                    best.threshold = 0.5 * (xv_l + xv_r);
                    best.gain = gain;
                    best.left_count = n_l;
                }
            }
        }
        return best;
    };

    nodes_.emplace_back();
    std::vector<WorkItem> stack;
    stack.push_back({std::vector<std::size_t>(row_indices.begin(), row_indices.end()), 0, 0});

    while (!stack.empty()) {
        WorkItem item = std::move(stack.back());
        stack.pop_back();
        TreeNode& node = nodes_[item.node_index];
        node.count = static_cast<int>(item.rows.size());
        node.value = leaf_value(item.rows);

        const bool can_split = item.depth < params.max_depth &&
                               item.rows.size() >= static_cast<std::size_t>(params.min_samples_split);
        if (!can_split) continue;
        const SplitCandidate best = find_split(item.rows);
        if (!best.valid || best.gain <= 0.0 || best.gain < params.min_split_gain) continue;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(best.left_count);
        right_rows.reserve(item.rows.size() - best.left_count);
        for (auto r : item.rows) {
            if (x.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }

        const int left_index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        const int right_index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        TreeNode& parent = nodes_[item.node_index];  // re-fetch, vector may have grown
        parent.feature = best.feature;
        parent.threshold = best.threshold;
        parent.left = left_index;
        parent.right = right_index;
        gains_.emplace_back(best.feature, best.gain);

        stack.push_back({std::move(right_rows), item.depth + 1, right_index});
        stack.push_back({std::move(left_rows), item.depth + 1, left_index});
    }
}

double CartTree::predict_one(std::span<const double> row) const {
    int i = 0;
    while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
}

std::vector<double> CartTree::split_gains(std::size_t n_cols) const {
    std::vector<double> gains(n_cols, 0.0);
    for (const auto& [feature, gain] : gains_) gains[static_cast<std::size_t>(feature)] += gain;
    return gains;
}

nlohmann::json CartTree::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes_) {
        arr.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"count", n.count}});
    }
    return arr;
}

void DecisionTreeModel::fit(const Matrix& x, std::span<const double> y) {
    if (x.rows == 0) throw std::invalid_argument("DecisionTreeModel::fit: empty data");
    n_cols_ = x.cols;
    standardizer_.fit(x);
    const Matrix xs = standardizer_.transform(x);
    tree_.fit(xs, y, params_);
}

double DecisionTreeModel::predict_one(std::span<const double> row) const {
    std::vector<double> z(row.size());
    standardizer_.transform_row(row, z);
    return tree_.predict_one(z);
}

std::optional<std::vector<double>> DecisionTreeModel::feature_importance() const {
    std::vector<double> gains = tree_.split_gains(n_cols_);
    const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    if (total > 0.0) {
        for (auto& g : gains) g /= total;
    }
    return gains;
}

nlohmann::json DecisionTreeModel::summary() const {
    return {{"model", "decision_tree"},
            {"version", 1},
            {"criterion", to_string(params_.criterion)},
            {"nodes", tree_.to_json()}};
}

}  // namespace sessioncast
