#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "sessioncast/matrix.hpp"

namespace sessioncast {

// A trained base model: fit once, then predict from any thread.
class Regressor {
public:
    virtual ~Regressor() = default;

    virtual void fit(const Matrix& x, std::span<const double> y) = 0;
    virtual double predict_one(std::span<const double> row) const = 0;

    std::vector<double> predict(const Matrix& x) const {
        std::vector<double> out(x.rows);
        for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_one(x.row(r));
        return out;
    }

    // Impurity-based importance per input column, normalized to sum 1.
    // nullopt for model families without a built-in importance.
    virtual std::optional<std::vector<double>> feature_importance() const { return std::nullopt; }

    // Self-describing model dump for inspection; not a stability contract.
    virtual nlohmann::json summary() const = 0;
};

}  // namespace sessioncast
