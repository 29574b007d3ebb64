#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "lwcmap/linalg.hpp"

namespace lwcmap {

struct TreeParams {
    int max_depth = 3;        // root-to-leaf edge count; <0 means unbounded
    int min_samples_leaf = 2;
};

// CART regression tree stored as parallel flat node arrays. Leaves carry
// feature = -1 and left = right = -1; internal nodes route x <= threshold
// to the left child.
struct RegressionTree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;

    std::size_t size() const { return feature.size(); }

    double predict_row(const double* x) const {
        int node = 0;
        while (feature[node] >= 0)
            node = (x[feature[node]] <= threshold[node]) ? left[node] : right[node];
        return value[node];
    }
};

namespace detail {

// Samples eligible feature indices for one split; nullptr means all
// features. The forest installs one that draws mtry features.
using FeatureSampler = std::function<void(std::vector<std::size_t>&)>;

struct TreeBuilder {
    const Matrix& x;
    const std::vector<double>& y;
    TreeParams params;
    const FeatureSampler* sampler;
    RegressionTree tree;
    std::vector<std::size_t> all_features;

    TreeBuilder(const Matrix& x_, const std::vector<double>& y_, const TreeParams& p,
                const FeatureSampler* s)
        : x(x_), y(y_), params(p), sampler(s) {
        all_features.resize(x.cols);
        for (std::size_t j = 0; j < x.cols; ++j) all_features[j] = j;
    }

    int new_node() {
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(0.0);
        return static_cast<int>(tree.feature.size()) - 1;
    }

    // Best split over the candidate features: midpoints between consecutive
    // distinct sorted values, both children >= min_samples_leaf, SSE must
    // strictly decrease. Ties resolve to the lower (feature, threshold).
    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = -std::numeric_limits<double>::infinity(); // S_L^2/n_L + S_R^2/n_R
    };

    Split find_split(const std::vector<std::size_t>& rows, double sum) const {
        const std::size_t n = rows.size();
        const double parent_score = sum * sum / static_cast<double>(n);
        const std::size_t msl = static_cast<std::size_t>(params.min_samples_leaf);

        std::vector<std::size_t> features = all_features;
        if (sampler && *sampler) (*sampler)(features);

        Split best;
        std::vector<std::pair<double, std::size_t>> order(n);
        for (std::size_t f : features) {
            for (std::size_t i = 0; i < n; ++i) order[i] = {x(rows[i], f), rows[i]};
            std::sort(order.begin(), order.end());

            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += y[order[i].second];
                double lo = order[i].first, hi = order[i + 1].first;
                if (!(lo < hi)) continue;
                std::size_t n_left = i + 1, n_right = n - n_left;
                if (n_left < msl || n_right < msl) continue;
                double mid = 0.5 * (lo + hi);
                if (!(lo < mid) || !(mid < hi)) continue; // adjacent representables
                double right_sum = sum - left_sum;
                double score = left_sum * left_sum / static_cast<double>(n_left) +
                               right_sum * right_sum / static_cast<double>(n_right);
                if (score > best.score) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = mid;
                    best.score = score;
                }
            }
        }
        if (best.found && !(best.score > parent_score)) best.found = false;
        return best;
    }

    int build(std::vector<std::size_t>& rows, int depth) {
        int node = new_node();
        double sum = 0.0;
        for (std::size_t r : rows) sum += y[r];
        tree.value[node] = sum / static_cast<double>(rows.size());

        bool depth_ok = params.max_depth < 0 || depth < params.max_depth;
        if (!depth_ok || rows.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf))
            return node;

        Split split = find_split(rows, sum);
        if (!split.found) return node;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        for (std::size_t r : rows) // stable partition keeps row order for summation
            (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree.feature[node] = static_cast<int>(split.feature);
        tree.threshold[node] = split.threshold;
        tree.left[node] = build(left_rows, depth + 1);
        tree.right[node] = build(right_rows, depth + 1);
        return node;
    }
};

inline RegressionTree fit_tree_impl(const Matrix& x, const std::vector<double>& y,
                                    const TreeParams& params, const FeatureSampler* sampler) {
    if (x.rows == 0 || y.empty()) fail("EmptyInput", "cannot fit a tree on zero rows");
    if (x.rows != y.size()) fail("DimensionMismatch", "X rows != y length");
    if (x.cols == 0) fail("EmptyInput", "cannot fit a tree on zero features");
    if (params.min_samples_leaf < 1) fail("InvalidConfig", "min_samples_leaf must be >= 1");
    for (double v : y)
        if (!std::isfinite(v)) fail("NonFiniteTarget", "target contains a non-finite value");
    for (double v : x.data)
        if (!std::isfinite(v)) fail("NonFiniteFeature", "feature matrix contains a non-finite value");

    TreeBuilder builder(x, y, params, sampler);
    std::vector<std::size_t> rows(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) rows[i] = i;
    builder.build(rows, 0);
    return std::move(builder.tree);
}

} // namespace detail

inline RegressionTree fit_tree(const Matrix& x, const std::vector<double>& y,
                               const TreeParams& params) {
    return detail::fit_tree_impl(x, y, params, nullptr);
}

inline std::vector<double> predict_tree(const RegressionTree& tree, const Matrix& x) {
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = tree.predict_row(x.row_ptr(i));
    return out;
}

} // namespace lwcmap
