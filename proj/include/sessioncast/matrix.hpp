#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sessioncast {

// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data.data() + r * cols, cols);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data.data() + r * cols, cols);
    }
};

Matrix select_columns(const Matrix& m, std::span<const int> cols);
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

// Z-score standardization with training-set statistics. Constant columns get
// unit scale so they map to all-zeros instead of dividing by zero.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    void fit(const Matrix& x);
    Matrix transform(const Matrix& x) const;
    void transform_row(std::span<const double> in, std::span<double> out) const;
};

// SplitMix64; used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace sessioncast
