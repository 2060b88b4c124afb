#include "sessioncast/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "sessioncast/forest.hpp"
#include "sessioncast/gbdt.hpp"
#include "sessioncast/linear.hpp"
#include "sessioncast/svr.hpp"
#include "sessioncast/tree.hpp"

namespace sessioncast {

namespace {

constexpr double kExclusionSlack = 1e-6;

std::vector<double> iota_values(int first, int last) {
    std::vector<double> v;
    for (int i = first; i <= last; ++i) v.push_back(i);
    return v;
}

std::vector<int> active_columns(const std::vector<bool>& mask) {
    std::vector<int> cols;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) cols.push_back(static_cast<int>(i));
    }
    return cols;
}

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::Linear: return "lr";
        case Family::Svr: return "svr";
        case Family::Tree: return "dt";
        case Family::Forest: return "rf";
        case Family::Gbdt: return "xgb";
    }
    return "?";
}

std::size_t HyperGrid::size() const {
    std::size_t n = 1;
    for (const auto& [name, values] : axes) n *= values.size();
    return n;
}

ParamMap HyperGrid::at(std::size_t index) const {
    ParamMap params;
    std::size_t stride = size();
    for (const auto& [name, values] : axes) {
        stride /= values.size();
        params[name] = values[(index / stride) % values.size()];
    }
    return params;
}

HyperGrid default_grid(Family family, GridProfile profile) {
    HyperGrid grid;
    grid.family = family;
    switch (family) {
        case Family::Linear:
            break;
        case Family::Svr:
            grid.axes = {{"c", {1, 10, 100, 1000}},
                         {"gamma", {0.01, 0.1, 1, 10}},
                         {"kernel", {0, 1}},  // 0 = rbf, 1 = linear
                         {"epsilon", {0.01, 0.1, 0.5, 1}}};
            break;
        case Family::Tree:
            grid.axes = {{"max_depth", iota_values(1, 19)},
                         {"min_samples_split", iota_values(2, 19)},
                         {"min_samples_leaf", {1, 2, 4, 6}},
                         {"criterion", {0, 1, 2}}};  // squared_error, friedman_mse, absolute_error
            break;
        case Family::Forest:
            grid.axes = {{"n_trees", {50, 75, 100, 150, 200, 250, 300}},
                         {"max_depth", iota_values(2, 6)},
                         {"min_samples_split", iota_values(2, 6)},
                         {"min_samples_leaf", iota_values(1, 5)}};
            break;
        case Family::Gbdt:
            grid.axes = {{"n_rounds", {25, 50, 100, 150, 200}},
                         {"learning_rate", {0.01, 0.1, 0.2}},
                         {"max_depth", {2, 3, 4, 5}},
                         {"subsample", {0.8, 0.9, 1.0}},
                         {"colsample", {0.8, 0.9, 1.0}},
                         {"min_split_loss", {0, 0.1, 0.2, 0.5}}};
            break;
    }
    if (profile == GridProfile::Fast) {
        for (auto& [name, values] : grid.axes) {
            if (values.size() > 2) values.resize(2);
        }
    }
    return grid;
}

ParamMap first_grid_point(const HyperGrid& grid) {
    ParamMap params;
    for (const auto& [name, values] : grid.axes) params[name] = values.front();
    return params;
}

std::unique_ptr<Regressor> make_regressor(Family family, const ParamMap& params,
                                          const FitContext& ctx) {
    auto get = [&](const char* name, double fallback) {
        const auto it = params.find(name);
        return it == params.end() ? fallback : it->second;
    };
    switch (family) {
        case Family::Linear:
            return std::make_unique<LinearModel>();
        case Family::Svr: {
            SvrParams p;
            p.c = get("c", 1.0);
            p.gamma = get("gamma", 0.1);
            p.epsilon = get("epsilon", 0.1);
            p.kernel = get("kernel", 0.0) < 0.5 ? SvrKernel::Rbf : SvrKernel::Linear;
            p.row_cap = ctx.svr_row_cap;
            p.seed = ctx.seed;
            return std::make_unique<SvrModel>(p);
        }
        case Family::Tree: {
            TreeParams p;
            p.max_depth = static_cast<int>(get("max_depth", 5));
            p.min_samples_split = static_cast<int>(get("min_samples_split", 2));
            p.min_samples_leaf = static_cast<int>(get("min_samples_leaf", 1));
            const int crit = static_cast<int>(get("criterion", 0));
            p.criterion = crit == 0   ? SplitCriterion::SquaredError
                          : crit == 1 ? SplitCriterion::FriedmanMse
                                      : SplitCriterion::AbsoluteError;
            return std::make_unique<DecisionTreeModel>(p);
        }
        case Family::Forest: {
            ForestParams p;
            p.n_trees = static_cast<int>(get("n_trees", 100));
            p.max_depth = static_cast<int>(get("max_depth", 5));
            p.min_samples_split = static_cast<int>(get("min_samples_split", 2));
            p.min_samples_leaf = static_cast<int>(get("min_samples_leaf", 1));
            p.seed = ctx.seed;
            return std::make_unique<RandomForestModel>(p);
        }
        case Family::Gbdt: {
            GbdtParams p;
            p.n_rounds = static_cast<int>(get("n_rounds", 100));
            p.learning_rate = get("learning_rate", 0.1);
            p.max_depth = static_cast<int>(get("max_depth", 3));
            p.subsample = get("subsample", 1.0);
            p.colsample = get("colsample", 1.0);
            p.min_split_loss = get("min_split_loss", 0.0);
            p.seed = ctx.seed;
            return std::make_unique<GradientBoostedModel>(p);
        }
    }
    throw std::logic_error("make_regressor: unknown family");
}

CvPlan CvPlan::contiguous(std::size_t n_rows, int k) {
    if (k < 2) throw std::invalid_argument("CvPlan: k must be >= 2");
    if (n_rows < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("CvPlan: fewer rows than folds");
    }
    CvPlan plan;
    plan.k = k;
    for (int f = 0; f < k; ++f) {
        const std::size_t begin = n_rows * static_cast<std::size_t>(f) / static_cast<std::size_t>(k);
        const std::size_t end =
            n_rows * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(k);
        plan.folds.emplace_back(begin, end);
    }
    return plan;
}

double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw std::invalid_argument("r2_score: length mismatch or empty");
    }
    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= static_cast<double>(y_true.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double r = y_true[i] - y_pred[i];
        const double d = y_true[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot < 1e-12) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

double cv_r2(Family family, const ParamMap& params, const Matrix& x, std::span<const double> y,
             const CvPlan& plan, const std::vector<bool>& mask, const FitContext& ctx) {
    const auto cols = active_columns(mask);
    const Matrix xsel = select_columns(x, cols);
    double total = 0.0;
    for (const auto& [begin, end] : plan.folds) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(x.rows - (end - begin));
        for (std::size_t r = 0; r < x.rows; ++r) {
            if (r < begin || r >= end) train_rows.push_back(r);
        }
        const Matrix x_train = select_rows(xsel, train_rows);
        std::vector<double> y_train(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];

        auto model = make_regressor(family, params, ctx);
        model->fit(x_train, y_train);

        std::vector<double> y_val(y.begin() + static_cast<std::ptrdiff_t>(begin),
                                  y.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<double> pred(end - begin);
        for (std::size_t r = begin; r < end; ++r) pred[r - begin] = model->predict_one(xsel.row(r));
        total += r2_score(y_val, pred);
    }
    return total / static_cast<double>(plan.folds.size());
}

GridSearchResult grid_search(Family family, const HyperGrid& grid, const Matrix& x,
                             std::span<const double> y, const CvPlan& plan,
                             const std::vector<bool>& mask, const FitContext& ctx) {
    const std::size_t n = grid.size();
    GridSearchResult best;
    bool have_best = false;
    for (std::size_t i = 0; i < n; ++i) {
        const ParamMap params = grid.at(i);
        const double score = cv_r2(family, params, x, y, plan, mask, ctx);
        if (!have_best || score > best.cv_score) {
            best = {params, score, i};
            have_best = true;
        }
    }
    return best;
}

SelectionResult sfbs(Family family, const ParamMap& params, const Matrix& x,
                     std::span<const double> y, const CvPlan& plan,
                     const std::vector<bool>& allowed_mask, const FitContext& ctx) {
    const auto n_allowed = std::count(allowed_mask.begin(), allowed_mask.end(), true);
    if (n_allowed < 2) throw std::invalid_argument("sfbs: need at least 2 allowed features");

    auto score_of = [&](const std::vector<bool>& mask) {
        return cv_r2(family, params, x, y, plan, mask, ctx);
    };

    std::vector<bool> current = allowed_mask;
    double current_score = score_of(current);

    // Near-tie drops inside the slack can be undone by a floating re-add,
    // which would revisit an earlier state forever; stop on any repeat.
    std::set<std::vector<bool>> seen;
    seen.insert(current);

    SelectionResult result;
    result.params = params;
    result.full_mask_cv = current_score;
    result.mask = current;
    result.cv_score = current_score;
    double best_seen = current_score;
    result.trajectory.push_back(best_seen);

    auto record = [&](const std::vector<bool>& mask, double score) {
        if (score > best_seen) {
            best_seen = score;
            result.mask = mask;
            result.cv_score = score;
        }
        result.trajectory.push_back(best_seen);
    };

    while (std::count(current.begin(), current.end(), true) > 1) {
        // Exclusion: try dropping each remaining feature.
        int drop = -1;
        double drop_score = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < current.size(); ++f) {
            if (!current[f]) continue;
            auto candidate = current;
            candidate[f] = false;
            const double s = score_of(candidate);
            if (s > drop_score) {
                drop_score = s;
                drop = static_cast<int>(f);
            }
        }
        if (drop < 0 || drop_score < current_score - kExclusionSlack) break;
        current[static_cast<std::size_t>(drop)] = false;
        current_score = drop_score;
        record(current, current_score);
        if (!seen.insert(current).second) break;

        // Floating: re-add previously dropped features while strictly improving.
        for (;;) {
            int add = -1;
            double add_score = current_score;
            for (std::size_t f = 0; f < current.size(); ++f) {
                if (current[f] || !allowed_mask[f]) continue;
                auto candidate = current;
                candidate[f] = true;
                const double s = score_of(candidate);
                if (s > add_score) {
                    add_score = s;
                    add = static_cast<int>(f);
                }
            }
            if (add < 0) break;
            current[static_cast<std::size_t>(add)] = true;
            current_score = add_score;
            record(current, current_score);
            if (!seen.insert(current).second) break;
        }
    }
    return result;
}

SelectionResult tune_and_select(Family family, const HyperGrid& grid, const Matrix& x,
                                std::span<const double> y, const CvPlan& plan,
                                const std::vector<bool>& allowed_mask, const FitContext& ctx) {
    if (grid.axes.empty()) {
        SelectionResult result = sfbs(family, {}, x, y, plan, allowed_mask, ctx);
        result.stage1_params = {};
        result.stage1_cv = result.full_mask_cv;
        return result;
    }
    const GridSearchResult pass1 = grid_search(family, grid, x, y, plan, allowed_mask, ctx);
    SelectionResult result = sfbs(family, pass1.params, x, y, plan, allowed_mask, ctx);
    const GridSearchResult pass3 = grid_search(family, grid, x, y, plan, result.mask, ctx);
    result.params = pass3.params;
    result.cv_score = pass3.cv_score;
    result.stage1_params = pass1.params;
    result.stage1_cv = pass1.cv_score;
    return result;
}

}  // namespace sessioncast
