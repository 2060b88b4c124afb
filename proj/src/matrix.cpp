#include "sessioncast/matrix.hpp"

#include <cmath>

namespace sessioncast {

Matrix select_columns(const Matrix& m, std::span<const int> cols) {
    Matrix out(m.rows, cols.size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out.at(r, j) = m.at(r, static_cast<std::size_t>(cols[j]));
        }
    }
    return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = m.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

void Standardizer::fit(const Matrix& x) {
    mean.assign(x.cols, 0.0);
    scale.assign(x.cols, 1.0);
    if (x.rows == 0) return;
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) mean[c] += x.at(r, c);
    }
    for (auto& m : mean) m /= static_cast<double>(x.rows);
    std::vector<double> var(x.cols, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            const double d = x.at(r, c) - mean[c];
            var[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < x.cols; ++c) {
        const double sd = std::sqrt(var[c] / static_cast<double>(x.rows));
        scale[c] = sd > 1e-12 ? sd : 1.0;
    }
}

Matrix Standardizer::transform(const Matrix& x) const {
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) transform_row(x.row(r), out.row(r));
    return out;
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - mean[c]) / scale[c];
}

}  // namespace sessioncast
