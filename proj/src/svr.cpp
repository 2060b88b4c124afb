#include "sessioncast/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sessioncast {

const char* to_string(SvrKernel k) { return k == SvrKernel::Rbf ? "rbf" : "linear"; }

SvrModel::SvrModel(SvrParams params) : params_(params) {
    if (params_.c <= 0.0 || params_.epsilon < 0.0 ||
        (params_.kernel == SvrKernel::Rbf && params_.gamma <= 0.0)) {
        throw std::invalid_argument("SvrModel: invalid hyperparameters");
    }
}

double SvrModel::kernel(std::span<const double> a, std::span<const double> b) const {
    if (params_.kernel == SvrKernel::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        dist2 += d * d;
    }
    return std::exp(-params_.gamma * dist2);
}

void SvrModel::fit(const Matrix& x, std::span<const double> y) {
    if (x.rows < 2) throw std::invalid_argument("SvrModel::fit: need at least 2 rows");

    // Seeded uniform subsample when over the row cap.
    std::vector<std::size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), 0);
    if (params_.row_cap > 0 && x.rows > params_.row_cap) {
        std::mt19937_64 rng(mix_seed(params_.seed, 0x5c));
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(params_.row_cap);
        std::sort(rows.begin(), rows.end());
    }

    Matrix raw = select_rows(x, rows);
    standardizer_.fit(raw);
    train_x_ = standardizer_.transform(raw);
    train_y_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) train_y_[i] = y[rows[i]];

    const std::size_t n = train_x_.rows;
    const double c = params_.c;
    const double eps = params_.epsilon;

    // Kernel rows, fully cached (training sizes here are capped well below
    // the memory limit this would imply for the raw dataset).
    std::vector<std::vector<double>> kcache(n);
    auto kernel_row = [&](std::size_t i) -> const std::vector<double>& {
        auto& row = kcache[i];
        if (row.empty()) {
            row.resize(n);
            for (std::size_t j = 0; j < n; ++j) row[j] = kernel(train_x_.row(i), train_x_.row(j));
        }
        return row;
    };

    // Dual variables beta = [alpha; alpha*], sign s = +1 / -1.
    const std::size_t m = 2 * n;
    std::vector<double> beta(m, 0.0);
    std::vector<double> grad(m);
    for (std::size_t t = 0; t < n; ++t) grad[t] = eps - train_y_[t];
    for (std::size_t t = 0; t < n; ++t) grad[n + t] = eps + train_y_[t];

    auto sign_of = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
    auto point_of = [n](std::size_t t) { return t < n ? t : t - n; };

    const std::size_t max_iter =
        params_.max_iter > 0 ? params_.max_iter : std::max<std::size_t>(100000, 200 * n);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Maximal violating pair over -s_t * grad_t.
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        std::size_t i = m, j = m;
        for (std::size_t t = 0; t < m; ++t) {
            const double s = sign_of(t);
            const double v = -s * grad[t];
            const bool in_up = s > 0 ? beta[t] < c : beta[t] > 0.0;
            const bool in_low = s > 0 ? beta[t] > 0.0 : beta[t] < c;
            if (in_up && v > up_max) {
                up_max = v;
                i = t;
            }
            if (in_low && v < low_min) {
                low_min = v;
                j = t;
            }
        }
        if (i == m || j == m || up_max - low_min <= params_.tol) break;

        const double si = sign_of(i), sj = sign_of(j);
        const std::size_t pi = point_of(i), pj = point_of(j);
        const auto& ki = kernel_row(pi);
        const auto& kj = kernel_row(pj);
        double curvature = ki[pi] + kj[pj] - 2.0 * ki[pj];
        if (curvature <= 1e-12) curvature = 1e-12;

        double delta = (up_max - low_min) / curvature;
        delta = std::min(delta, si > 0 ? c - beta[i] : beta[i]);
        delta = std::min(delta, sj > 0 ? beta[j] : c - beta[j]);
        if (delta <= 0.0) break;

        beta[i] += si * delta;
        beta[j] -= sj * delta;
        for (std::size_t t = 0; t < m; ++t) {
            const std::size_t pt = point_of(t);
            grad[t] += sign_of(t) * delta * (ki[pt] - kj[pt]);
        }
    }

    theta_.resize(n);
    for (std::size_t t = 0; t < n; ++t) theta_[t] = beta[t] - beta[n + t];

    // Bias from free dual variables; fall back to the violation midpoint.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
        const double s = sign_of(t);
        const double v = -s * grad[t];
        if (beta[t] > 0.0 && beta[t] < c) {
            free_sum += v;
            ++free_count;
        }
        const bool in_up = s > 0 ? beta[t] < c : beta[t] > 0.0;
        const bool in_low = s > 0 ? beta[t] > 0.0 : beta[t] < c;
        if (in_up) up_max = std::max(up_max, v);
        if (in_low) low_min = std::min(low_min, v);
    }
    bias_ = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (up_max + low_min);
}

double SvrModel::predict_one(std::span<const double> row) const {
    std::vector<double> z(row.size());
    standardizer_.transform_row(row, z);
    double f = bias_;
    for (std::size_t i = 0; i < train_x_.rows; ++i) {
        if (theta_[i] != 0.0) f += theta_[i] * kernel(train_x_.row(i), z);
    }
    return f;
}

double SvrModel::dual_objective() const {
    const std::size_t n = train_x_.rows;
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (theta_[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (theta_[j] == 0.0) continue;
            quad += theta_[i] * theta_[j] * kernel(train_x_.row(i), train_x_.row(j));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        lin += params_.epsilon * std::abs(theta_[i]) - train_y_[i] * theta_[i];
    }
    return 0.5 * quad + lin;
}

nlohmann::json SvrModel::summary() const {
    std::size_t n_sv = 0;
    for (double t : theta_) {
        if (t != 0.0) ++n_sv;
    }
    return {{"model", "svr"},
            {"version", 1},
            {"kernel", to_string(params_.kernel)},
            {"c", params_.c},
            {"gamma", params_.gamma},
            {"epsilon", params_.epsilon},
            {"support_vectors", n_sv},
            {"bias", bias_}};
}

}  // namespace sessioncast
