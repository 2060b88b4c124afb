#include "sessioncast/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace sessioncast {

std::vector<double> solve_linear_system(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

void LinearModel::fit(const Matrix& x, std::span<const double> y) {
    if (x.rows < 1) throw std::invalid_argument("LinearModel::fit: empty data");
    for (double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("LinearModel::fit: non-finite target");
    }
    standardizer_.fit(x);
    const Matrix z = standardizer_.transform(x);

    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(y.size());
    intercept_ = y_mean;

    const std::size_t k = x.cols;
    std::vector<std::vector<double>> gram(k, std::vector<double>(k, 0.0));
    std::vector<double> rhs(k, 0.0);
    for (std::size_t r = 0; r < z.rows; ++r) {
        const auto row = z.row(r);
        const double resid = y[r] - y_mean;
        for (std::size_t i = 0; i < k; ++i) {
            rhs[i] += row[i] * resid;
            for (std::size_t j = i; j < k; ++j) gram[i][j] += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        gram[i][i] += ridge_;
        for (std::size_t j = 0; j < i; ++j) gram[i][j] = gram[j][i];
    }
    coef_ = k > 0 ? solve_linear_system(std::move(gram), std::move(rhs)) : std::vector<double>{};
}

double LinearModel::predict_one(std::span<const double> row) const {
    std::vector<double> z(row.size());
    standardizer_.transform_row(row, z);
    double p = intercept_;
    for (std::size_t i = 0; i < z.size(); ++i) p += coef_[i] * z[i];
    return p;
}

nlohmann::json LinearModel::summary() const {
    return {{"model", "linear"},
            {"version", 1},
            {"intercept", intercept_},
            {"coefficients", coef_}};
}

}  // namespace sessioncast
