#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "lwcmap/model.hpp"
#include "lwcmap/rng.hpp"

namespace lwcmap {

namespace detail {

inline void check_xy(const Matrix& x, const std::vector<double>& y) {
    if (x.rows == 0 || y.empty()) fail("EmptyInput", "no training rows");
    if (x.rows != y.size()) fail("DimensionMismatch", "X rows != y length");
    for (double v : y)
        if (!std::isfinite(v)) fail("NonFiniteTarget", "target contains a non-finite value");
    for (double v : x.data)
        if (!std::isfinite(v)) fail("NonFiniteFeature", "features contain a non-finite value");
}

inline std::vector<std::size_t> complement_indices(std::size_t n,
                                                   const std::vector<std::size_t>& held_out) {
    std::vector<bool> mask(n, false);
    for (std::size_t i : held_out) mask[i] = true;
    std::vector<std::size_t> out;
    out.reserve(n - held_out.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!mask[i]) out.push_back(i);
    return out;
}

template <typename T>
inline std::vector<T> select(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

} // namespace detail

// --- gradient boosting --------------------------------------------------
//
// F0 = mean(y); each round fits a depth-capped tree to the residuals and
// adds it with shrinkage nu. Squared loss, so training MSE never increases.

inline TrainedModel fit_gbm(const Matrix& x, const std::vector<double>& y,
                            const std::vector<std::string>& feature_names, const GbmParams& params,
                            std::uint64_t seed) {
    detail::check_xy(x, y);
    if (params.n_trees < 0) fail("InvalidConfig", "n_trees must be >= 0");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
        fail("InvalidConfig", "learning_rate must be in (0, 1]");

    GbmPayload payload;
    payload.learning_rate = params.learning_rate;
    payload.init = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    std::vector<double> residual(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - payload.init;

    TreeParams tp{params.max_depth, params.min_samples_leaf};
    payload.trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int m = 0; m < params.n_trees; ++m) {
        RegressionTree tree = fit_tree(x, residual, tp);
        for (std::size_t i = 0; i < y.size(); ++i)
            residual[i] -= params.learning_rate * tree.predict_row(x.row_ptr(i));
        payload.trees.push_back(std::move(tree));
    }

    TrainedModel model;
    model.model_type = ModelType::Gbm;
    model.feature_names = feature_names;
    model.standardizer = Standardizer::identity(x.cols);
    model.seed = seed;
    model.payload = std::move(payload);
    return model;
}

// --- lasso with cross-validated lambda ------------------------------------
//
// Objective (1/2n)||y - Xb||^2 + lambda ||b||_1 on standardized features.
// Cyclic coordinate descent with soft-thresholding, warm-started down the
// descending grid; lambda* minimizes mean k-fold CV MSE, ties toward the
// larger lambda; final refit on all rows.

namespace detail {

inline double soft_threshold(double rho, double lambda) {
    if (rho > lambda) return rho - lambda;
    if (rho < -lambda) return rho + lambda;
    return 0.0;
}

// One coordinate-descent solve at fixed lambda; beta is the warm start and
// residual = yc - Xs beta is maintained across calls.
inline void lasso_cd(const Matrix& xs, const std::vector<double>& col_norm, double lambda,
                     int max_iter, double tol, std::vector<double>& beta,
                     std::vector<double>& residual) {
    const std::size_t n = xs.rows, p = xs.cols;
    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_norm[j] <= 0.0) continue; // constant within this fold
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += xs(i, j) * residual[i];
            double rho = dot / static_cast<double>(n) + col_norm[j] * beta[j];
            double next = soft_threshold(rho, lambda) / col_norm[j];
            if (next != beta[j]) {
                double delta = next - beta[j];
                for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * xs(i, j);
                beta[j] = next;
                max_delta = std::max(max_delta, std::fabs(delta));
            }
        }
        if (max_delta < tol) break;
    }
}

struct LassoPathInput {
    Matrix xs;               // standardized rows in use
    std::vector<double> yc;  // centered target
    double y_mean = 0.0;
    std::vector<double> col_norm;
};

inline LassoPathInput lasso_prepare(const Matrix& xs_all, const std::vector<double>& y,
                                    const std::vector<std::size_t>& rows) {
    LassoPathInput in;
    in.xs = xs_all.select_rows(rows);
    auto yr = select(y, rows);
    in.y_mean = std::accumulate(yr.begin(), yr.end(), 0.0) / static_cast<double>(yr.size());
    in.yc.resize(yr.size());
    for (std::size_t i = 0; i < yr.size(); ++i) in.yc[i] = yr[i] - in.y_mean;
    in.col_norm.assign(in.xs.cols, 0.0);
    for (std::size_t j = 0; j < in.xs.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < in.xs.rows; ++i) s += in.xs(i, j) * in.xs(i, j);
        in.col_norm[j] = s / static_cast<double>(in.xs.rows);
    }
    return in;
}

} // namespace detail

inline TrainedModel fit_lasso_cv(const Matrix& x, const std::vector<double>& y,
                                 const std::vector<std::string>& feature_names,
                                 const LassoParams& params, std::uint64_t seed) {
    detail::check_xy(x, y);
    const std::size_t n = x.rows, p = x.cols;
    if (n < 2) fail("SingularInput", "lasso needs at least 2 rows");
    if (params.cv_folds < 2) fail("InvalidConfig", "cv_folds must be >= 2");
    if (n < static_cast<std::size_t>(params.cv_folds))
        fail("InsufficientData", "fewer rows than CV folds");
    if (!(params.tol > 0)) fail("InvalidConfig", "tol must be > 0");

    // standardize to zero mean / unit population variance
    Standardizer st;
    st.means.resize(p);
    st.stds.resize(p);
    Matrix xs(n, p);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = x(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        if (!(var > 0.0))
            fail("ConstantFeature", "feature '" +
                                        (j < feature_names.size() ? feature_names[j]
                                                                  : std::to_string(j)) +
                                        "' is constant");
        st.means[j] = mean;
        st.stds[j] = std::sqrt(var);
        for (std::size_t i = 0; i < n; ++i) xs(i, j) = (x(i, j) - mean) / st.stds[j];
    }

    const double y_mean_all = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    // lambda_max = max_j |<x~_j, y - ybar>| / n zeroes every coefficient
    double lambda_max = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += xs(i, j) * (y[i] - y_mean_all);
        lambda_max = std::max(lambda_max, std::fabs(dot) / static_cast<double>(n));
    }

    TrainedModel model;
    model.model_type = ModelType::LassoCv;
    model.feature_names = feature_names;
    model.standardizer = st;
    model.seed = seed;

    if (lambda_max < 1e-300) { // target carries no linear signal at all
        LassoPayload payload;
        payload.coefficients.assign(p, 0.0);
        payload.intercept = y_mean_all;
        payload.lambda = 0.0;
        model.payload = std::move(payload);
        return model;
    }

    std::vector<double> grid = params.lambda_grid;
    if (grid.empty()) {
        int m = std::max(2, params.n_lambda);
        double lo = std::log(lambda_max * params.lambda_min_ratio), hi = std::log(lambda_max);
        for (int k = 0; k < m; ++k)
            grid.push_back(std::exp(hi + (lo - hi) * static_cast<double>(k) / (m - 1)));
    }
    std::sort(grid.begin(), grid.end(), std::greater<>());

    // k-fold CV over the shared grid
    auto folds = make_folds(n, static_cast<std::size_t>(params.cv_folds), derive_seed(seed, 101));
    std::vector<double> cv_mse(grid.size(), 0.0);
    for (const auto& test_idx : folds) {
        auto train_idx = detail::complement_indices(n, test_idx);
        auto in = detail::lasso_prepare(xs, y, train_idx);
        std::vector<double> beta(p, 0.0), residual = in.yc;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            detail::lasso_cd(in.xs, in.col_norm, grid[g], params.max_iter, params.tol, beta,
                             residual);
            double sse = 0.0;
            for (std::size_t t : test_idx) {
                double pred = in.y_mean;
                for (std::size_t j = 0; j < p; ++j) pred += beta[j] * xs(t, j);
                double d = y[t] - pred;
                sse += d * d;
            }
            cv_mse[g] += sse / static_cast<double>(test_idx.size());
        }
    }

    std::size_t best_g = 0; // strict '<' keeps the largest lambda on ties
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (cv_mse[g] < cv_mse[best_g]) best_g = g;

    // final path refit on all rows down to lambda*
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    auto in = detail::lasso_prepare(xs, y, all);
    std::vector<double> beta(p, 0.0), residual = in.yc;
    for (std::size_t g = 0; g <= best_g; ++g)
        detail::lasso_cd(in.xs, in.col_norm, grid[g], params.max_iter, params.tol, beta, residual);

    LassoPayload payload;
    payload.lambda = grid[best_g];
    payload.coefficients.resize(p);
    payload.intercept = in.y_mean;
    for (std::size_t j = 0; j < p; ++j) {
        payload.coefficients[j] = beta[j] / st.stds[j];
        payload.intercept -= payload.coefficients[j] * st.means[j];
    }
    model.payload = std::move(payload);
    return model;
}

// --- random forest ----------------------------------------------------------

inline TrainedModel fit_random_forest(const Matrix& x, const std::vector<double>& y,
                                      const std::vector<std::string>& feature_names,
                                      const ForestParams& params, std::uint64_t seed) {
    detail::check_xy(x, y);
    if (params.n_trees < 1) fail("InvalidConfig", "n_trees must be >= 1");
    if (params.min_samples_leaf < 1) fail("InvalidConfig", "min_samples_leaf must be >= 1");
    const std::size_t n = x.rows, p = x.cols;
    const std::size_t mtry = params.mtry <= 0
                                 ? std::max<std::size_t>(1, p / 3)
                                 : std::min<std::size_t>(static_cast<std::size_t>(params.mtry), p);

    ForestPayload payload;
    payload.mtry = static_cast<int>(mtry);
    payload.bootstrap = params.bootstrap;
    payload.trees.reserve(static_cast<std::size_t>(params.n_trees));

    TreeParams tp{params.max_depth, params.min_samples_leaf};
    for (int b = 0; b < params.n_trees; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));

        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = rng.below(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }

        detail::FeatureSampler sampler;
        if (mtry < p) {
            sampler = [&rng, mtry, p](std::vector<std::size_t>& feats) {
                feats.resize(p);
                for (std::size_t j = 0; j < p; ++j) feats[j] = j;
                for (std::size_t i = 0; i < mtry; ++i) {
                    std::size_t j = i + rng.below(p - i);
                    std::swap(feats[i], feats[j]);
                }
                feats.resize(mtry);
                std::sort(feats.begin(), feats.end()); // canonical tie-break order
            };
        }

        detail::TreeBuilder builder(x, y, tp, sampler ? &sampler : nullptr);
        builder.build(rows, 0);
        payload.trees.push_back(std::move(builder.tree));
    }

    TrainedModel model;
    model.model_type = ModelType::RandomForest;
    model.feature_names = feature_names;
    model.standardizer = Standardizer::identity(p);
    model.seed = seed;
    model.payload = std::move(payload);
    return model;
}

// --- stacked ensemble ---------------------------------------------------
//
// K-fold out-of-fold predictions from {gbm, lasso_cv, random_forest} form
// the meta matrix; the meta learner is OLS with intercept (minimum-norm
// solve, so a rank-deficient meta column cannot break it). Base learners
// are refit on all rows for inference.

inline TrainedModel fit_stacked(const Matrix& x, const std::vector<double>& y,
                                const std::vector<std::string>& feature_names,
                                const HyperParams& params, std::uint64_t seed) {
    detail::check_xy(x, y);
    const std::size_t n = x.rows;
    if (params.stack.cv_folds < 2) fail("InvalidConfig", "cv_folds must be >= 2");

    auto folds = make_folds(n, static_cast<std::size_t>(params.stack.cv_folds),
                            derive_seed(seed, 1001));

    Matrix meta(n, 3);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& test_idx = folds[f];
        auto train_idx = detail::complement_indices(n, test_idx);
        Matrix xtr = x.select_rows(train_idx);
        auto ytr = detail::select(y, train_idx);
        Matrix xte = x.select_rows(test_idx);

        TrainedModel base[3] = {
            fit_gbm(xtr, ytr, feature_names, params.gbm, derive_seed(seed, 2000 + f)),
            fit_lasso_cv(xtr, ytr, feature_names, params.lasso, derive_seed(seed, 3000 + f)),
            fit_random_forest(xtr, ytr, feature_names, params.rf, derive_seed(seed, 4000 + f))};
        for (std::size_t b = 0; b < 3; ++b) {
            auto pred = predict(base[b], xte);
            for (std::size_t t = 0; t < test_idx.size(); ++t) meta(test_idx[t], b) = pred[t];
        }
    }

    Matrix design(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        for (std::size_t b = 0; b < 3; ++b) design(i, b + 1) = meta(i, b);
    }
    auto w = min_norm_lstsq(design, y);

    StackedPayload payload;
    payload.meta_intercept = w[0];
    payload.meta_weights = {w[1], w[2], w[3]};
    payload.base_models.push_back(fit_gbm(x, y, feature_names, params.gbm, derive_seed(seed, 2999)));
    payload.base_models.push_back(
        fit_lasso_cv(x, y, feature_names, params.lasso, derive_seed(seed, 3999)));
    payload.base_models.push_back(
        fit_random_forest(x, y, feature_names, params.rf, derive_seed(seed, 4999)));

    TrainedModel model;
    model.model_type = ModelType::Stacked;
    model.feature_names = feature_names;
    model.standardizer = Standardizer::identity(x.cols);
    model.seed = seed;
    model.payload = std::move(payload);
    return model;
}

// Dispatch used by the experiment runner and CLI.
inline TrainedModel fit_model(ModelType type, const Matrix& x, const std::vector<double>& y,
                              const std::vector<std::string>& feature_names,
                              const HyperParams& params, std::uint64_t seed) {
    switch (type) {
        case ModelType::Gbm: return fit_gbm(x, y, feature_names, params.gbm, seed);
        case ModelType::LassoCv: return fit_lasso_cv(x, y, feature_names, params.lasso, seed);
        case ModelType::RandomForest:
            return fit_random_forest(x, y, feature_names, params.rf, seed);
        default: return fit_stacked(x, y, feature_names, params, seed);
    }
}

} // namespace lwcmap
