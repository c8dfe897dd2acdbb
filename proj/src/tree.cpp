#include "stepcast/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace stepcast::models {

namespace {

struct Builder {
    const Matrix& X;
    const std::vector<int>& y;  // class indices 0..K-1
    std::size_t n_classes;
    Rng& rng;
    Tree& tree;
    std::vector<double>& importance;
    double inv_root_rows;

    double gini(const std::vector<std::size_t>& counts, std::size_t total) const {
        double g = 1.0;
        for (std::size_t c : counts) {
            double p = static_cast<double>(c) / static_cast<double>(total);
            g -= p * p;
        }
        return g;
    }

    int majority(const std::vector<std::size_t>& counts) const {
        std::size_t best = 0;
        for (std::size_t c = 1; c < counts.size(); ++c)
            if (counts[c] > counts[best]) best = c;
        return static_cast<int>(best);
    }

    // Returns the node index. `rows` holds the row indices reaching this node.
    int build(std::vector<std::size_t> rows) {
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t i : rows) ++counts[static_cast<std::size_t>(y[i])];
        double node_gini = gini(counts, rows.size());

        int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        if (node_gini == 0.0) {
            tree.nodes[node_index].label = majority(counts);
            return node_index;
        }

        std::size_t d = X.cols;
        std::size_t n_candidates =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(
                                         static_cast<double>(d)))));

        // Partial Fisher-Yates draw of candidate features without replacement.
        std::vector<std::size_t> features(d);
        std::iota(features.begin(), features.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_candidates; ++i) {
            std::size_t j = static_cast<std::size_t>(
                rng.int_range(static_cast<std::int64_t>(i), static_cast<std::int64_t>(d - 1)));
            std::swap(features[i], features[j]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_decrease = 0.0;
        std::vector<std::size_t> left_counts(n_classes);

        auto try_feature = [&](std::size_t j) {
            double lo = X.at(rows[0], j);
            double hi = lo;
            for (std::size_t i : rows) {
                double v = X.at(i, j);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo == hi) return;
            double threshold = rng.uniform(lo, hi);
            std::fill(left_counts.begin(), left_counts.end(), 0);
            std::size_t n_left = 0;
            for (std::size_t i : rows) {
                if (X.at(i, j) <= threshold) {
                    ++left_counts[static_cast<std::size_t>(y[i])];
                    ++n_left;
                }
            }
            std::size_t n_right = rows.size() - n_left;
            if (n_left == 0 || n_right == 0) return;  // degenerate threshold draw
            std::vector<std::size_t> right_counts(n_classes);
            for (std::size_t c = 0; c < n_classes; ++c) right_counts[c] = counts[c] - left_counts[c];
            double frac_left = static_cast<double>(n_left) / static_cast<double>(rows.size());
            double decrease = node_gini - frac_left * gini(left_counts, n_left) -
                              (1.0 - frac_left) * gini(right_counts, n_right);
            if (best_feature < 0 || decrease > best_decrease) {
                best_feature = static_cast<int>(j);
                best_threshold = threshold;
                best_decrease = decrease;
            }
        };

        for (std::size_t i = 0; i < n_candidates; ++i) try_feature(features[i]);
        if (best_feature < 0) {
            // Candidates were constant or drew degenerate thresholds; fall back
            // to every varying feature so an impure node still splits.
            for (std::size_t j = 0; j < d; ++j) try_feature(j);
        }
        if (best_feature < 0) {
            tree.nodes[node_index].label = majority(counts);
            return node_index;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (std::size_t i : rows) {
            if (X.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
                left_rows.push_back(i);
            else
                right_rows.push_back(i);
        }
        // Gini decrease is non-negative in exact arithmetic; rounding can
        // leave a crumb below zero, which must not leak into importances.
        importance[static_cast<std::size_t>(best_feature)] +=
            static_cast<double>(rows.size()) * inv_root_rows * std::max(best_decrease, 0.0);

        rows.clear();
        rows.shrink_to_fit();
        int left = build(std::move(left_rows));
        int right = build(std::move(right_rows));
        tree.nodes[node_index].feature = best_feature;
        tree.nodes[node_index].threshold = best_threshold;
        tree.nodes[node_index].left = left;
        tree.nodes[node_index].right = right;
        return node_index;
    }
};

int walk(const Tree& tree, std::span<const double> x) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].label;
}

}  // namespace

TreeEnsembleModel tree_importance(const Matrix& X, const std::vector<int>& y_class,
                                  int n_estimators, std::uint64_t seed) {
    if (X.rows < 10) fail(ErrorKind::TooFewRows, "tree_importance needs at least 10 rows");
    if (y_class.size() != X.rows) fail(ErrorKind::DimensionMismatch, "label length mismatch");
    if (n_estimators < 1) fail(ErrorKind::InvalidValue, "n_estimators must be positive");

    TreeEnsembleModel model;
    model.n_estimators = n_estimators;
    model.seed = seed;
    model.classes = y_class;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                        model.classes.end());
    if (model.classes.size() < 2)
        fail(ErrorKind::SingleClass, "tree_importance needs at least two classes");

    std::vector<int> y_index(y_class.size());
    for (std::size_t i = 0; i < y_class.size(); ++i) {
        auto it = std::lower_bound(model.classes.begin(), model.classes.end(), y_class[i]);
        y_index[i] = static_cast<int>(it - model.classes.begin());
    }

    model.importances.assign(X.cols, 0.0);
    model.trees.resize(static_cast<std::size_t>(n_estimators));
    std::vector<std::size_t> all_rows(X.rows);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

    for (int t = 0; t < n_estimators; ++t) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        Builder builder{X,
                        y_index,
                        model.classes.size(),
                        rng,
                        model.trees[static_cast<std::size_t>(t)],
                        model.importances,
                        1.0 / static_cast<double>(X.rows)};
        builder.build(all_rows);
    }

    double total = 0.0;
    for (double v : model.importances) total += v;
    if (total <= 0.0)
        fail(ErrorKind::DegenerateInput, "no split reduced impurity, importances undefined");
    for (auto& v : model.importances) v /= total;
    return model;
}

int tree_predict(const TreeEnsembleModel& model, std::span<const double> x) {
    std::map<int, int> votes;
    for (const auto& tree : model.trees) {
        int class_index = walk(tree, x);
        ++votes[model.classes[static_cast<std::size_t>(class_index)]];
    }
    int best_label = model.classes.front();
    int best_votes = 0;
    for (const auto& [label, count] : votes) {
        if (count > best_votes) {  // map iterates ascending, ties keep the smaller label
            best_label = label;
            best_votes = count;
        }
    }
    return best_label;
}

}  // namespace stepcast::models
