#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sessioncast/regressor.hpp"

namespace sessioncast {

enum class Family { Linear, Svr, Tree, Forest, Gbdt };

inline constexpr std::array<Family, 5> kFamilies = {Family::Linear, Family::Svr, Family::Tree,
                                                    Family::Forest, Family::Gbdt};

const char* to_string(Family f);

using ParamMap = std::map<std::string, double>;

enum class GridProfile { Full, Fast };

// Cartesian hyperparameter grid; enumeration order is axis-major (first axis
// slowest), which is also the deterministic tie-break order.
struct HyperGrid {
    Family family = Family::Linear;
    std::vector<std::pair<std::string, std::vector<double>>> axes;

    std::size_t size() const;
    ParamMap at(std::size_t index) const;
};

// The per-family grids; the fast profile keeps the first two values per axis.
HyperGrid default_grid(Family family, GridProfile profile);

struct FitContext {
    std::uint64_t seed = 0;
    std::size_t svr_row_cap = 5000;
};

std::unique_ptr<Regressor> make_regressor(Family family, const ParamMap& params,
                                          const FitContext& ctx);

// First `params` value of every axis; used for under-sized strata.
ParamMap first_grid_point(const HyperGrid& grid);

// Contiguous, time-ordered folds partitioning [0, n).
struct CvPlan {
    int k = 5;
    std::vector<std::pair<std::size_t, std::size_t>> folds;  // [begin, end)

    static CvPlan contiguous(std::size_t n_rows, int k);
};

// 1 - SS_res / SS_tot; a constant-target fold scores 0 by convention.
double r2_score(std::span<const double> y_true, std::span<const double> y_pred);

// Mean out-of-fold R^2 across the plan's folds, fit on the masked columns.
double cv_r2(Family family, const ParamMap& params, const Matrix& x, std::span<const double> y,
             const CvPlan& plan, const std::vector<bool>& mask, const FitContext& ctx);

struct GridSearchResult {
    ParamMap params;
    double cv_score = 0.0;
    std::size_t index = 0;
};

GridSearchResult grid_search(Family family, const HyperGrid& grid, const Matrix& x,
                             std::span<const double> y, const CvPlan& plan,
                             const std::vector<bool>& mask, const FitContext& ctx);

struct SelectionResult {
    std::vector<bool> mask;
    ParamMap params;
    double cv_score = 0.0;
    std::vector<double> trajectory;  // accepted-step scores (running best)
    double full_mask_cv = 0.0;
    ParamMap stage1_params;
    double stage1_cv = 0.0;
    bool sfbs_skipped = false;
};

// Sequential floating backward selection: greedy exclusions with a small
// acceptance slack, floating re-additions on strict improvement. Returns the
// best-scoring accepted state, so the result never scores below the full mask.
SelectionResult sfbs(Family family, const ParamMap& params, const Matrix& x,
                     std::span<const double> y, const CvPlan& plan,
                     const std::vector<bool>& allowed_mask, const FitContext& ctx);

// tune (full mask) -> select -> re-tune on the selected mask.
SelectionResult tune_and_select(Family family, const HyperGrid& grid, const Matrix& x,
                                std::span<const double> y, const CvPlan& plan,
                                const std::vector<bool>& allowed_mask, const FitContext& ctx);

}  // namespace sessioncast
