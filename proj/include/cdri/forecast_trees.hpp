#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cdri {

/// Row-major sample matrix: samples x features.
using FeatureMatrix = std::vector<std::vector<double>>;

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf: mean of routed training targets
    int samples = 0;

    bool is_leaf() const { return feature < 0; }
};

/// CART regression tree. Greedy SSE-minimizing binary splits; candidate
/// thresholds are midpoints between consecutive sorted distinct feature
/// values; ties broken by (lower feature index, lower threshold); a split is
/// made only if it strictly reduces total squared error. x[feature] <=
/// threshold routes left.
struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root; preorder
    int max_depth = -1;          // < 0: unlimited
    int min_samples_leaf = 1;

    double predict(std::span<const double> x) const;
};

RegressionTree fit_tree(const FeatureMatrix& X, const std::vector<double>& y, int max_depth,
                        int min_samples_leaf);

/// Bootstrap-averaged forest. Tree k trains on a resample drawn with
/// seed = derive_seed(master_seed, k) (full data when bootstrap is off), so
/// results are bit-identical regardless of evaluation order. Prediction is
/// the mean of member-tree outputs, accumulated in ascending value order so
/// it is invariant under tree permutation, bitwise.
struct ForestModel {
    std::vector<RegressionTree> trees;
    bool bootstrap = true;
    std::uint64_t master_seed = 0;

    double predict(std::span<const double> x) const;
};

ForestModel fit_forest(const FeatureMatrix& X, const std::vector<double>& y, int n_trees,
                       bool bootstrap, std::uint64_t master_seed, int max_depth,
                       int min_samples_leaf);

/// Stagewise gradient boosting on squared error. F0 = mean(y); stage k fits a
/// tree to the residuals and adds learning_rate * tree.
struct BoostStage {
    RegressionTree tree;
    double learning_rate = 0.1;
};

struct BoostModel {
    double initial = 0.0; // target mean
    std::vector<BoostStage> stages;
    /// Training MSE trajectory: entry 0 is the stage-0 baseline (constant
    /// model), then one entry per stage. Non-increasing for lr in (0,1].
    std::vector<double> train_mse;

    double predict(std::span<const double> x) const;
};

BoostModel fit_boost(const FeatureMatrix& X, const std::vector<double>& y, int n_stages,
                     double learning_rate, int max_depth, int min_samples_leaf);

} // namespace cdri
