#pragma once

#include <cstdint>

#include "sessioncast/regressor.hpp"

namespace sessioncast {

enum class SvrKernel { Rbf, Linear };

const char* to_string(SvrKernel k);

struct SvrParams {
    double c = 1.0;
    double gamma = 0.1;     // RBF spread; ignored for the linear kernel
    double epsilon = 0.1;   // insensitivity tube half-width
    SvrKernel kernel = SvrKernel::Rbf;
    std::size_t row_cap = 5000;  // SMO is quadratic-ish; larger inputs are subsampled
    std::uint64_t seed = 0;
    double tol = 1e-3;      // KKT violation tolerance
    std::size_t max_iter = 0;    // 0 = derived from training size
};

// Epsilon-SVR trained by an SMO-style pairwise dual optimizer (maximal
// violating pair selection). Targets are fit in original units on
// standardized features.
class SvrModel final : public Regressor {
public:
    explicit SvrModel(SvrParams params);

    void fit(const Matrix& x, std::span<const double> y) override;
    double predict_one(std::span<const double> row) const override;
    nlohmann::json summary() const override;

    double bias() const { return bias_; }

    // Dual coefficients (alpha - alpha*) per retained training row, support
    // vectors included with zeros; exposed for the KKT checks.
    const std::vector<double>& dual_coefficients() const { return theta_; }
    const Matrix& training_rows() const { return train_x_; }          // standardized
    const std::vector<double>& training_targets() const { return train_y_; }

    // Dual objective value of the trained solution:
    // 1/2 th' K th + eps * sum|th| - y' th  (minimization form).
    double dual_objective() const;

private:
    double kernel(std::span<const double> a, std::span<const double> b) const;

    SvrParams params_;
    Standardizer standardizer_;
    Matrix train_x_;              // standardized retained rows
    std::vector<double> train_y_;
    std::vector<double> theta_;   // alpha - alpha*
    double bias_ = 0.0;
};

}  // namespace sessioncast
