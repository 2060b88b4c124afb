#include "sessioncast/stacking.hpp"

#include <numeric>

namespace sessioncast {

namespace {

std::vector<int> mask_columns(const std::vector<bool>& mask) {
    std::vector<int> cols;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) cols.push_back(static_cast<int>(i));
    }
    return cols;
}

std::vector<double> gather(std::span<const double> row, const std::vector<int>& cols) {
    std::vector<double> out(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) out[i] = row[static_cast<std::size_t>(cols[i])];
    return out;
}

}  // namespace

StackedEnsemble StackedEnsemble::fit(const Matrix& x, std::span<const double> y, const CvPlan& plan,
                                     const std::array<BaseSpec, kNumBases>& bases,
                                     const HyperGrid& meta_grid, const FitContext& ctx,
                                     const BaseFactory& factory) {
    const BaseFactory make = factory ? factory : BaseFactory(&make_regressor);

    StackedEnsemble ens;
    ens.specs_ = bases;
    std::vector<bool> union_mask(x.cols, false);
    for (std::size_t b = 0; b < kNumBases; ++b) {
        ens.base_cols_[b] = mask_columns(bases[b].mask);
        for (std::size_t c = 0; c < x.cols && c < bases[b].mask.size(); ++c) {
            if (bases[b].mask[c]) union_mask[c] = true;
        }
    }
    ens.union_cols_ = mask_columns(union_mask);

    // Out-of-fold base forecasts.
    ens.oof_ = Matrix(x.rows, kNumBases);
    for (const auto& [begin, end] : plan.folds) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(x.rows - (end - begin));
        for (std::size_t r = 0; r < x.rows; ++r) {
            if (r < begin || r >= end) train_rows.push_back(r);
        }
        std::vector<double> y_train(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];
        for (std::size_t b = 0; b < kNumBases; ++b) {
            const Matrix x_cols = select_columns(x, ens.base_cols_[b]);
            const Matrix x_train = select_rows(x_cols, train_rows);
            auto model = make(bases[b].family, bases[b].params, ctx);
            model->fit(x_train, y_train);
            for (std::size_t r = begin; r < end; ++r) {
                ens.oof_.at(r, b) = model->predict_one(x_cols.row(r));
            }
        }
    }

    // Meta training matrix = OOF forecasts ++ selected original features.
    Matrix meta_x(x.rows, kNumBases + ens.union_cols_.size());
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t b = 0; b < kNumBases; ++b) meta_x.at(r, b) = ens.oof_.at(r, b);
        for (std::size_t c = 0; c < ens.union_cols_.size(); ++c) {
            meta_x.at(r, kNumBases + c) = x.at(r, static_cast<std::size_t>(ens.union_cols_[c]));
        }
    }

    const std::vector<bool> all_cols(meta_x.cols, true);
    const GridSearchResult meta_best =
        grid_search(Family::Gbdt, meta_grid, meta_x, y, plan, all_cols, ctx);
    ens.meta_params_ = meta_best.params;
    ens.meta_cv_score_ = meta_best.cv_score;
    ens.meta_model_ = make_regressor(Family::Gbdt, meta_best.params, ctx);
    ens.meta_model_->fit(meta_x, y);

    // Refit bases on all rows for inference.
    for (std::size_t b = 0; b < kNumBases; ++b) {
        const Matrix x_train = select_columns(x, ens.base_cols_[b]);
        ens.base_models_[b] = make(bases[b].family, bases[b].params, ctx);
        ens.base_models_[b]->fit(x_train, y);
    }
    return ens;
}

std::vector<double> StackedEnsemble::assemble_meta_row(std::span<const double> row) const {
    std::vector<double> meta_row(kNumBases + union_cols_.size());
    for (std::size_t b = 0; b < kNumBases; ++b) meta_row[b] = base_predict_one(b, row);
    for (std::size_t c = 0; c < union_cols_.size(); ++c) {
        meta_row[kNumBases + c] = row[static_cast<std::size_t>(union_cols_[c])];
    }
    return meta_row;
}

double StackedEnsemble::predict_one(std::span<const double> row) const {
    return meta_model_->predict_one(assemble_meta_row(row));
}

std::vector<double> StackedEnsemble::predict(const Matrix& x) const {
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_one(x.row(r));
    return out;
}

double StackedEnsemble::base_predict_one(std::size_t base, std::span<const double> row) const {
    return base_models_[base]->predict_one(gather(row, base_cols_[base]));
}

std::vector<double> StackedEnsemble::meta_importance() const {
    const auto imp = meta_model_->feature_importance();
    if (imp) return *imp;
    return std::vector<double>(kNumBases + union_cols_.size(), 0.0);
}

nlohmann::json StackedEnsemble::summary() const {
    nlohmann::json base_list = nlohmann::json::array();
    for (std::size_t b = 0; b < kNumBases; ++b) {
        nlohmann::json mask = nlohmann::json::array();
        for (int c : base_cols_[b]) mask.push_back(c);
        base_list.push_back({{"family", to_string(specs_[b].family)},
                             {"params", specs_[b].params},
                             {"columns", mask}});
    }
    return {{"bases", base_list},
            {"meta_params", meta_params_},
            {"meta_cv_r2", meta_cv_score_},
            {"meta_feature_columns", union_cols_}};
}

}  // namespace sessioncast
