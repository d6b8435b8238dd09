#include "cdri/forecast_trees.hpp"

#include "cdri/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

using namespace cdri;

namespace {

// Exhaustive depth-1 split oracle: every midpoint between consecutive sorted
// distinct values of every feature, SSE computed definitionally (mean, then
// squared deviations), ties by (feature, threshold).
struct OracleSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double children_sse = std::numeric_limits<double>::infinity();
};

double part_sse(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sse = 0.0;
    for (double v : values) sse += (v - mean) * (v - mean);
    return sse;
}

OracleSplit exhaustive_depth1(const FeatureMatrix& X, const std::vector<double>& y,
                              int min_samples_leaf) {
    OracleSplit best;
    std::size_t n_features = X[0].size();
    for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<double> values;
        for (const auto& row : X) values.push_back(row[f]);
        std::vector<double> distinct = values;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
            double threshold = (distinct[k] + distinct[k + 1]) * 0.5;
            if (!(threshold < distinct[k + 1])) continue;
            std::vector<double> left, right;
            for (std::size_t i = 0; i < X.size(); ++i) {
                (X[i][f] <= threshold ? left : right).push_back(y[i]);
            }
            if (left.size() < static_cast<std::size_t>(min_samples_leaf) ||
                right.size() < static_cast<std::size_t>(min_samples_leaf)) {
                continue;
            }
            double sse = part_sse(left) + part_sse(right);
            if (sse < best.children_sse) {
                best.found = true;
                best.feature = f;
                best.threshold = threshold;
                best.children_sse = sse;
            }
        }
    }
    return best;
}

FeatureMatrix column(const std::vector<double>& xs) {
    FeatureMatrix X;
    for (double x : xs) X.push_back({x});
    return X;
}

} // namespace

TEST_CASE("fit_tree: memorizes distinct points at unlimited depth") {
    std::vector<double> xs = {0, 1, 2, 3, 4, 5, 6};
    std::vector<double> ys = {3.0, 1.5, 4.0, 2.0, 5.0, 1.0, 2.5};
    RegressionTree tree = fit_tree(column(xs), ys, -1, 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(tree.predict(std::array{xs[i]}) == ys[i]);
    }
}

TEST_CASE("fit_tree: constant targets give a single leaf") {
    std::vector<double> xs = {0, 1, 2, 3};
    std::vector<double> ys = {2.7, 2.7, 2.7, 2.7};
    RegressionTree tree = fit_tree(column(xs), ys, -1, 1);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.predict(std::array{-100.0}) == 2.7);
    CHECK(tree.predict(std::array{100.0}) == 2.7);
}

TEST_CASE("fit_tree: depth-1 step function picks the documented split") {
    FeatureMatrix X = column({0, 1, 2, 3});
    std::vector<double> y = {0, 0, 10, 10};
    RegressionTree tree = fit_tree(X, y, 1, 1);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == 1.5);
    CHECK(tree.predict(std::array{0.5}) == 0.0);
    CHECK(tree.predict(std::array{2.5}) == 10.0);
}

TEST_CASE("fit_tree: input validation") {
    CHECK_THROWS_AS(fit_tree({}, {}, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_tree(column({1.0}), {1.0}, -1, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_tree(column({1.0, 2.0}), {1.0}, -1, 1), std::invalid_argument);
}

TEST_CASE("fit_tree: min_samples_leaf blocks small partitions") {
    FeatureMatrix X = column({0, 1, 2, 3});
    std::vector<double> y = {0, 0, 0, 10};
    RegressionTree tree = fit_tree(X, y, 1, 2);
    REQUIRE(tree.nodes.size() == 3);
    // only the middle candidate leaves 2 on each side
    CHECK(tree.nodes[0].threshold == 1.5);
}

TEST_CASE("fit_tree: depth-1 split matches exhaustive enumeration on 50 seeded datasets") {
    Pcg32 rng(2001);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 4 + rng.bounded(9); // up to 12
        FeatureMatrix X;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            X.push_back({rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)});
            y.push_back(rng.uniform(1.0, 5.0));
        }
        RegressionTree tree = fit_tree(X, y, 1, 1);
        OracleSplit oracle = exhaustive_depth1(X, y, 1);
        REQUIRE(oracle.found);
        REQUIRE(tree.nodes.size() == 3);
        CHECK(tree.nodes[0].feature == static_cast<int>(oracle.feature));
        CHECK(tree.nodes[0].threshold == oracle.threshold); // bitwise
    }
}

TEST_CASE("fit_tree: every split strictly reduces routed SSE") {
    Pcg32 rng(2002);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        X.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    RegressionTree tree = fit_tree(X, y, -1, 2);

    // Route every training sample through the tree, collecting per-node targets.
    std::vector<std::vector<double>> node_targets(tree.nodes.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        int node = 0;
        node_targets[0].push_back(y[i]);
        while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
            node = X[i][static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
            node_targets[static_cast<std::size_t>(node)].push_back(y[i]);
        }
    }
    int internal = 0;
    for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
        const TreeNode& node = tree.nodes[nd];
        if (node.is_leaf()) {
            // leaf value equals the mean of routed targets
            double mean = 0.0;
            for (double v : node_targets[nd]) mean += v;
            mean /= static_cast<double>(node_targets[nd].size());
            CHECK(node.value == doctest::Approx(mean).epsilon(1e-12));
            CHECK(node.samples == static_cast<int>(node_targets[nd].size()));
            continue;
        }
        ++internal;
        double parent = part_sse(node_targets[nd]);
        double children = part_sse(node_targets[static_cast<std::size_t>(node.left)]) +
                          part_sse(node_targets[static_cast<std::size_t>(node.right)]);
        CHECK(children < parent);
    }
    CHECK(internal > 0);
}

TEST_CASE("fit_tree: predictions stay within the target range") {
    Pcg32 rng(2003);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        X.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    double lo = *std::min_element(y.begin(), y.end());
    double hi = *std::max_element(y.begin(), y.end());
    RegressionTree tree = fit_tree(X, y, -1, 1);
    for (int probe = 0; probe < 200; ++probe) {
        std::array<double, 2> x = {rng.uniform(-5.0, 15.0), rng.uniform(-5.0, 15.0)};
        double p = tree.predict(x);
        CHECK(p >= lo);
        CHECK(p <= hi);
    }
}

TEST_CASE("fit_tree: time-only trees extrapolate flat") {
    std::vector<double> t = {0, 1, 2, 3};
    std::vector<double> y = {1.0, 2.0, 3.0, 4.0};
    RegressionTree tree = fit_tree(column(t), y, -1, 1);
    double at_max = tree.predict(std::array{3.0});
    CHECK(tree.predict(std::array{4.0}) == at_max);
    CHECK(tree.predict(std::array{400.0}) == at_max);
    CHECK(at_max == 4.0); // rightmost leaf memorized the last point
}

TEST_CASE("fit_forest: single tree without bootstrap reduces to fit_tree") {
    Pcg32 rng(2010);
    for (int trial = 0; trial < 20; ++trial) {
        FeatureMatrix X;
        std::vector<double> y;
        std::size_t n = 5 + rng.bounded(10);
        for (std::size_t i = 0; i < n; ++i) {
            X.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)});
            y.push_back(rng.uniform(1.0, 5.0));
        }
        ForestModel forest = fit_forest(X, y, 1, false, 777, 3, 1);
        RegressionTree tree = fit_tree(X, y, 3, 1);
        for (int probe = 0; probe < 20; ++probe) {
            std::array<double, 2> x = {rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)};
            CHECK(forest.predict(x) == tree.predict(x)); // exact reduction
        }
    }
}

TEST_CASE("fit_forest: constant targets stay constant") {
    FeatureMatrix X = column({0, 1, 2, 3, 4});
    std::vector<double> y(5, 3.3);
    ForestModel forest = fit_forest(X, y, 25, true, 42, -1, 1);
    CHECK(forest.predict(std::array{2.0}) == 3.3);
    CHECK(forest.predict(std::array{-9.0}) == 3.3);
}

TEST_CASE("fit_forest: prediction equals the mean of member-tree outputs") {
    Pcg32 rng(2011);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 12; ++i) {
        X.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    ForestModel forest = fit_forest(X, y, 10, true, 4242, 2, 1);
    REQUIRE(forest.trees.size() == 10);
    std::array<double, 2> x = {2.5, 1.0};
    std::vector<double> outs;
    for (const auto& tree : forest.trees) outs.push_back(tree.predict(x));
    std::sort(outs.begin(), outs.end());
    double mean = 0.0;
    for (double v : outs) mean += v;
    mean /= 10.0;
    CHECK(forest.predict(x) == mean);
}

TEST_CASE("fit_forest: predictions stay within the target range") {
    Pcg32 rng(2015);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 25; ++i) {
        X.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    double lo = *std::min_element(y.begin(), y.end());
    double hi = *std::max_element(y.begin(), y.end());
    ForestModel forest = fit_forest(X, y, 40, true, 808, 3, 1);
    for (int probe = 0; probe < 100; ++probe) {
        std::array<double, 2> x = {rng.uniform(-5.0, 15.0), rng.uniform(-5.0, 15.0)};
        double p = forest.predict(x);
        CHECK(p >= lo);
        CHECK(p <= hi);
    }
}

TEST_CASE("fit_forest: prediction is invariant under tree permutation, bitwise") {
    Pcg32 rng(2012);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 15; ++i) {
        X.push_back({rng.uniform(0.0, 5.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    ForestModel forest = fit_forest(X, y, 16, true, 5, -1, 1);
    ForestModel shuffled = forest;
    for (std::size_t i = shuffled.trees.size(); i > 1; --i) {
        std::swap(shuffled.trees[i - 1], shuffled.trees[rng.bounded(static_cast<std::uint32_t>(i))]);
    }
    for (int probe = 0; probe < 50; ++probe) {
        std::array<double, 1> x = {rng.uniform(-2.0, 7.0)};
        CHECK(forest.predict(x) == shuffled.predict(x));
    }
}

TEST_CASE("fit_forest: deterministic per master seed") {
    Pcg32 rng(2013);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        X.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    ForestModel a = fit_forest(X, y, 30, true, 99, 3, 2);
    ForestModel b = fit_forest(X, y, 30, true, 99, 3, 2);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t k = 0; k < a.trees.size(); ++k) {
        REQUIRE(a.trees[k].nodes.size() == b.trees[k].nodes.size());
        for (std::size_t n = 0; n < a.trees[k].nodes.size(); ++n) {
            CHECK(a.trees[k].nodes[n].feature == b.trees[k].nodes[n].feature);
            CHECK(a.trees[k].nodes[n].threshold == b.trees[k].nodes[n].threshold);
            CHECK(a.trees[k].nodes[n].value == b.trees[k].nodes[n].value);
        }
    }
    ForestModel c = fit_forest(X, y, 30, true, 100, 3, 2);
    bool any_diff = false;
    for (int probe = 0; probe < 20; ++probe) {
        std::array<double, 2> x = {rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)};
        any_diff = any_diff || a.predict(x) != c.predict(x);
    }
    CHECK(any_diff);
}

TEST_CASE("fit_boost: zero stages predict the mean") {
    FeatureMatrix X = column({0, 1, 2});
    std::vector<double> y = {1.0, 2.0, 6.0};
    BoostModel model = fit_boost(X, y, 0, 0.1, 2, 1);
    CHECK(model.predict(std::array{0.0}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(model.predict(std::array{99.0}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(model.stages.empty());
    REQUIRE(model.train_mse.size() == 1);
}

TEST_CASE("fit_boost: one full-rate stage memorizes distinct points") {
    std::vector<double> xs = {0, 1, 2, 3, 4};
    std::vector<double> ys = {2.0, 1.0, 4.5, 3.0, 5.0};
    BoostModel model = fit_boost(column(xs), ys, 1, 1.0, -1, 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(model.predict(std::array{xs[i]}) == doctest::Approx(ys[i]).epsilon(1e-12));
    }
    CHECK(model.train_mse.back() < 1e-24);
}

TEST_CASE("fit_boost: full rate beats half rate after one stage") {
    Pcg32 rng(2020);
    FeatureMatrix X;
    std::vector<double> y;
    for (int i = 0; i < 16; ++i) {
        X.push_back({rng.uniform(0.0, 8.0)});
        y.push_back(rng.uniform(1.0, 5.0));
    }
    BoostModel full = fit_boost(X, y, 1, 1.0, 2, 1);
    BoostModel half = fit_boost(X, y, 1, 0.5, 2, 1);
    CHECK(full.train_mse.back() <= half.train_mse.back());
}

TEST_CASE("fit_boost: training MSE is non-increasing on 20 seeded datasets") {
    Pcg32 rng(2021);
    const double rates[] = {0.1, 0.5, 0.7, 1.0};
    for (int trial = 0; trial < 20; ++trial) {
        FeatureMatrix X;
        std::vector<double> y;
        std::size_t n = 8 + rng.bounded(25);
        for (std::size_t i = 0; i < n; ++i) {
            X.push_back({rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0)});
            y.push_back(rng.uniform(1.0, 5.0));
        }
        BoostModel model = fit_boost(X, y, 50, rates[trial % 4], 2, 2);
        REQUIRE(model.train_mse.size() == 51);
        for (std::size_t k = 1; k < model.train_mse.size(); ++k) {
            CHECK(model.train_mse[k] <= model.train_mse[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("fit_boost: validates hyperparameters") {
    FeatureMatrix X = column({0, 1});
    std::vector<double> y = {1, 2};
    CHECK_THROWS_AS(fit_boost(X, y, -1, 0.1, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_boost(X, y, 5, 0.0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_boost(X, y, 5, 1.5, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_boost({}, {}, 5, 0.1, 2, 1), std::invalid_argument);
}

TEST_CASE("ensemble predictions: trivial compositions") {
    RegressionTree leaf;
    leaf.nodes.push_back(TreeNode{});
    leaf.nodes[0].value = 2.7;
    CHECK(leaf.predict(std::array{123.0}) == 2.7);

    BoostModel boost;
    boost.initial = 3.1;
    CHECK(boost.predict(std::array{0.0}) == 3.1);

    RegressionTree stump_a = leaf;
    stump_a.nodes[0].value = 2.0;
    RegressionTree stump_b = leaf;
    stump_b.nodes[0].value = 4.0;
    ForestModel forest;
    forest.trees = {stump_a, stump_b};
    CHECK(forest.predict(std::array{1.0}) == 3.0);
}
