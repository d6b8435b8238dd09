#include "cdri/forecast_trees.hpp"

#include "cdri/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cdri {

namespace {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double children_sse = std::numeric_limits<double>::infinity();
};

double subset_mean(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) {
        s += y[i];
    }
    return s / static_cast<double>(idx.size());
}

double subset_sse(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
    double m = subset_mean(y, idx);
    double s = 0.0;
    for (std::size_t i : idx) {
        double d = y[i] - m;
        s += d * d;
    }
    return s;
}

bool all_equal(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
    for (std::size_t i : idx) {
        if (y[i] != y[idx[0]]) {
            return false;
        }
    }
    return true;
}

// Candidate SSEs are computed definitionally (mean, then squared deviations)
// in ascending original-sample order. Two candidates on different features can
// induce the identical partition; a shortcut formula evaluated in per-feature
// sort order rounds them apart and breaks the (feature, threshold) tie rule.
SplitChoice best_split(const FeatureMatrix& X, const std::vector<double>& y,
                       const std::vector<std::size_t>& idx, int min_samples_leaf) {
    SplitChoice best;
    std::size_t n = idx.size();
    std::size_t n_features = X[idx[0]].size();

    std::vector<double> values(n);
    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;

    for (std::size_t f = 0; f < n_features; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = X[idx[i]][f];
        }
        std::sort(values.begin(), values.end());
        auto distinct_end = std::unique(values.begin(), values.end());
        for (auto it = values.begin(); it + 1 < distinct_end; ++it) {
            double lo = *it;
            double hi = *(it + 1);
            double threshold = (lo + hi) * 0.5;
            // A midpoint that rounds onto the right value cannot separate the
            // partition; both the fit and the enumeration oracle skip it.
            if (!(threshold < hi)) {
                continue;
            }
            left_idx.clear();
            right_idx.clear();
            for (std::size_t i : idx) {
                (X[i][f] <= threshold ? left_idx : right_idx).push_back(i);
            }
            if (left_idx.size() < static_cast<std::size_t>(min_samples_leaf) ||
                right_idx.size() < static_cast<std::size_t>(min_samples_leaf)) {
                continue;
            }
            double children = subset_sse(y, left_idx) + subset_sse(y, right_idx);
            if (children < best.children_sse) {
                best.found = true;
                best.feature = f;
                best.threshold = threshold;
                best.children_sse = children;
            }
        }
    }
    return best;
}

int grow(RegressionTree& tree, const FeatureMatrix& X, const std::vector<double>& y,
         const std::vector<std::size_t>& idx, int depth) {
    int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_index].samples = static_cast<int>(idx.size());

    bool depth_ok = tree.max_depth < 0 || depth < tree.max_depth;
    if (depth_ok && idx.size() >= 2 && !all_equal(y, idx)) {
        SplitChoice split = best_split(X, y, idx, tree.min_samples_leaf);
        if (split.found && split.children_sse < subset_sse(y, idx)) {
            std::vector<std::size_t> left_idx;
            std::vector<std::size_t> right_idx;
            for (std::size_t i : idx) {
                (X[i][split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
            }
            tree.nodes[node_index].feature = static_cast<int>(split.feature);
            tree.nodes[node_index].threshold = split.threshold;
            int left = grow(tree, X, y, left_idx, depth + 1);
            tree.nodes[node_index].left = left;
            int right = grow(tree, X, y, right_idx, depth + 1);
            tree.nodes[node_index].right = right;
            return node_index;
        }
    }
    tree.nodes[node_index].value = subset_mean(y, idx);
    return node_index;
}

void check_training_input(const FeatureMatrix& X, const std::vector<double>& y) {
    if (X.empty() || y.empty()) {
        throw std::invalid_argument("tree fit: empty input");
    }
    if (X.size() != y.size()) {
        throw std::invalid_argument("tree fit: X and y differ in length");
    }
    for (const auto& row : X) {
        if (row.size() != X[0].size() || row.empty()) {
            throw std::invalid_argument("tree fit: ragged or empty feature rows");
        }
    }
}

} // namespace

double RegressionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

RegressionTree fit_tree(const FeatureMatrix& X, const std::vector<double>& y, int max_depth,
                        int min_samples_leaf) {
    check_training_input(X, y);
    if (min_samples_leaf < 1) {
        throw std::invalid_argument("fit_tree: min_samples_leaf must be >= 1");
    }
    RegressionTree tree;
    tree.max_depth = max_depth;
    tree.min_samples_leaf = min_samples_leaf;
    std::vector<std::size_t> idx(X.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    grow(tree, X, y, idx, 0);
    return tree;
}

double ForestModel::predict(std::span<const double> x) const {
    std::vector<double> outputs;
    outputs.reserve(trees.size());
    for (const RegressionTree& tree : trees) {
        outputs.push_back(tree.predict(x));
    }
    // Ascending-value accumulation keeps the mean invariant under tree
    // permutation, bitwise; the all-equal shortcut keeps it exact.
    std::sort(outputs.begin(), outputs.end());
    if (outputs.front() == outputs.back()) {
        return outputs.front();
    }
    double sum = 0.0;
    for (double v : outputs) {
        sum += v;
    }
    return sum / static_cast<double>(outputs.size());
}

ForestModel fit_forest(const FeatureMatrix& X, const std::vector<double>& y, int n_trees,
                       bool bootstrap, std::uint64_t master_seed, int max_depth,
                       int min_samples_leaf) {
    check_training_input(X, y);
    if (n_trees < 1) {
        throw std::invalid_argument("fit_forest: n_trees must be >= 1");
    }
    ForestModel forest;
    forest.bootstrap = bootstrap;
    forest.master_seed = master_seed;
    forest.trees.reserve(static_cast<std::size_t>(n_trees));

    std::size_t n = X.size();
    for (int k = 0; k < n_trees; ++k) {
        if (!bootstrap) {
            forest.trees.push_back(fit_tree(X, y, max_depth, min_samples_leaf));
            continue;
        }
        Pcg32 rng(derive_seed(master_seed, static_cast<std::uint64_t>(k)));
        FeatureMatrix Xb;
        std::vector<double> yb;
        Xb.reserve(n);
        yb.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto pick = rng.bounded(static_cast<std::uint32_t>(n));
            Xb.push_back(X[pick]);
            yb.push_back(y[pick]);
        }
        forest.trees.push_back(fit_tree(Xb, yb, max_depth, min_samples_leaf));
    }
    return forest;
}

double BoostModel::predict(std::span<const double> x) const {
    double value = initial;
    for (const BoostStage& stage : stages) {
        value += stage.learning_rate * stage.tree.predict(x);
    }
    return value;
}

BoostModel fit_boost(const FeatureMatrix& X, const std::vector<double>& y, int n_stages,
                     double learning_rate, int max_depth, int min_samples_leaf) {
    check_training_input(X, y);
    if (n_stages < 0) {
        throw std::invalid_argument("fit_boost: n_stages must be >= 0");
    }
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw std::invalid_argument("fit_boost: learning_rate must lie in (0, 1]");
    }

    BoostModel model;
    std::size_t n = X.size();
    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    model.initial = mean;

    std::vector<double> current(n, mean);
    std::vector<double> residual(n);
    auto record_mse = [&]() {
        double mse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = y[i] - current[i];
            mse += e * e;
        }
        model.train_mse.push_back(mse / static_cast<double>(n));
    };
    record_mse();

    for (int stage = 0; stage < n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = y[i] - current[i];
        }
        RegressionTree tree = fit_tree(X, residual, max_depth, min_samples_leaf);
        for (std::size_t i = 0; i < n; ++i) {
            current[i] += learning_rate * tree.predict(X[i]);
        }
        model.stages.push_back(BoostStage{std::move(tree), learning_rate});
        record_mse();
    }
    return model;
}

} // namespace cdri
