#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace uqx {

struct ForestParams {
    int n_estimators = 100;
    int max_depth = 0; // 0 = unbounded
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    bool sqrt_features = false; // false = consider every feature at each node

    bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    std::vector<double> raw_importance; // summed SSE decrease per feature
    bool has_split = false;
};

struct RandomForestModel {
    ForestParams params;
    std::uint64_t seed = 0;
    int n_features = 0;
    std::vector<RegressionTree> trees;
};

// CART-style regression forest: one bootstrap sample per tree (RNG stream
// derived from (seed, tree index), so the forest is identical regardless of
// build order), optional sqrt-feature subsampling per node, splits chosen to
// maximise the SSE decrease with thresholds at midpoints between distinct
// sorted values. Split ties break towards the lowest feature index, then the
// lowest threshold.
RandomForestModel fit_random_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const ForestParams& params, std::uint64_t seed);

double forest_predict_row(const RandomForestModel& model, const Eigen::VectorXd& row);
Eigen::VectorXd forest_predict(const RandomForestModel& model, const Eigen::MatrixXd& x);

// Mean of per-tree normalised impurity-decrease importances over trees that
// split at least once, renormalised to sum 1. All-zero (constant forest)
// yields an all-zero vector.
std::vector<double> rf_importance(const RandomForestModel& model);

} // namespace uqx
