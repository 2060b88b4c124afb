#pragma once

#include "sessioncast/regressor.hpp"

namespace sessioncast {

// Ordinary least squares via normal equations on standardized features, with a
// tiny ridge term so collinear or constant columns stay solvable.
class LinearModel final : public Regressor {
public:
    explicit LinearModel(double ridge = 1e-8) : ridge_(ridge) {}

    void fit(const Matrix& x, std::span<const double> y) override;
    double predict_one(std::span<const double> row) const override;
    nlohmann::json summary() const override;

    double intercept() const { return intercept_; }
    const std::vector<double>& coefficients() const { return coef_; }

private:
    double ridge_;
    Standardizer standardizer_;
    double intercept_ = 0.0;            // in target space (mean of y)
    std::vector<double> coef_;          // per standardized feature
};

// Dense symmetric positive-definite solve (Gaussian elimination with partial
// pivoting); shared with the test oracles' explicit inversions.
std::vector<double> solve_linear_system(std::vector<std::vector<double>> a, std::vector<double> b);

}  // namespace sessioncast
