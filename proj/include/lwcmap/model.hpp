#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lwcmap/tree.hpp"

namespace lwcmap {

enum class ModelType { Gbm, LassoCv, RandomForest, Stacked };

inline const char* model_type_name(ModelType t) {
    switch (t) {
        case ModelType::Gbm: return "gbm";
        case ModelType::LassoCv: return "lasso_cv";
        case ModelType::RandomForest: return "random_forest";
        default: return "stacked";
    }
}

// Per-feature (mean, stddev). Tree models store the identity standardizer;
// the lasso records the one it trained with.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    static Standardizer identity(std::size_t p) {
        return Standardizer{std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
    }
};

struct GbmPayload {
    double init = 0.0; // F0 = mean(y)
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
};

struct LassoPayload {
    std::vector<double> coefficients; // original (unstandardized) feature units
    double intercept = 0.0;
    double lambda = 0.0; // chosen by CV
};

struct ForestPayload {
    std::vector<RegressionTree> trees;
    int mtry = 0;
    bool bootstrap = true;
};

struct TrainedModel;

struct StackedPayload {
    std::vector<TrainedModel> base_models; // gbm, lasso_cv, random_forest
    std::vector<double> meta_weights;
    double meta_intercept = 0.0;
};

struct TrainedModel {
    ModelType model_type = ModelType::Gbm;
    std::vector<std::string> feature_names;
    Standardizer standardizer;
    std::uint64_t seed = 0;
    std::variant<GbmPayload, LassoPayload, ForestPayload, StackedPayload> payload;
};

// --- hyperparameters --------------------------------------------------------

struct GbmParams {
    int n_trees = 200;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_leaf = 2;
};

struct LassoParams {
    std::vector<double> lambda_grid; // descending; empty = auto grid from lambda_max
    int n_lambda = 60;
    double lambda_min_ratio = 1e-4;
    int cv_folds = 5;
    int max_iter = 100000; // coordinate-descent sweeps per lambda
    double tol = 1e-7;
};

struct ForestParams {
    int n_trees = 200;
    int mtry = 0; // 0 = max(1, p/3)
    bool bootstrap = true;
    int max_depth = -1; // unbounded
    int min_samples_leaf = 2;
};

struct StackParams {
    int cv_folds = 5;
};

struct HyperParams {
    GbmParams gbm;
    LassoParams lasso;
    ForestParams rf;
    StackParams stack;
};

// --- prediction -------------------------------------------------------------

namespace detail {

inline double predict_row_impl(const TrainedModel& m, const double* x);

inline double predict_row_gbm(const GbmPayload& p, const double* x) {
    double acc = 0.0;
    for (const auto& t : p.trees) acc += t.predict_row(x);
    return p.init + p.learning_rate * acc;
}

inline double predict_row_lasso(const LassoPayload& p, const double* x) {
    double acc = p.intercept;
    for (std::size_t j = 0; j < p.coefficients.size(); ++j) acc += p.coefficients[j] * x[j];
    return acc;
}

inline double predict_row_forest(const ForestPayload& p, const double* x) {
    double acc = 0.0;
    for (const auto& t : p.trees) acc += t.predict_row(x); // fixed order, bit-stable
    return acc / static_cast<double>(p.trees.size());
}

inline double predict_row_stacked(const StackedPayload& p, const double* x) {
    double acc = p.meta_intercept;
    for (std::size_t b = 0; b < p.base_models.size(); ++b)
        acc += p.meta_weights[b] * predict_row_impl(p.base_models[b], x);
    return acc;
}

inline double predict_row_impl(const TrainedModel& m, const double* x) {
    switch (m.model_type) {
        case ModelType::Gbm: return predict_row_gbm(std::get<GbmPayload>(m.payload), x);
        case ModelType::LassoCv: return predict_row_lasso(std::get<LassoPayload>(m.payload), x);
        case ModelType::RandomForest:
            return predict_row_forest(std::get<ForestPayload>(m.payload), x);
        default: return predict_row_stacked(std::get<StackedPayload>(m.payload), x);
    }
}

} // namespace detail

// Single-row prediction; the caller guarantees x has feature_names.size()
// finite entries (the mapper's pixel loop uses this path).
inline double predict_row(const TrainedModel& m, const double* x) {
    return detail::predict_row_impl(m, x);
}

inline std::vector<double> predict(const TrainedModel& m, const Matrix& x) {
    if (x.cols != m.feature_names.size())
        fail("DimensionMismatch", "X has " + std::to_string(x.cols) + " columns, model expects " +
                                      std::to_string(m.feature_names.size()));
    for (double v : x.data)
        if (!std::isfinite(v)) fail("NonFiniteFeature", "prediction input contains a non-finite value");
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = detail::predict_row_impl(m, x.row_ptr(i));
    return out;
}

} // namespace lwcmap
