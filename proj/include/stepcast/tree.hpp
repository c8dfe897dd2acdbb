#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stepcast/core.hpp"

namespace stepcast::models {

// Axis-aligned split node; feature == -1 marks a leaf carrying `label`.
// Children are indices into the owning tree's node vector.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root
};

// Ensemble of fully grown randomized trees. Each node samples sqrt(d)
// candidate features and draws one uniform threshold per candidate inside
// the node's value range, keeping the split with the best Gini decrease.
struct TreeEnsembleModel {
    std::vector<Tree> trees;
    std::vector<double> importances;  // per feature, non-negative, sums to 1
    int n_estimators = 10;
    std::uint64_t seed = 0;
    std::vector<int> classes;  // sorted ascending
};

// Importance of feature j is the sum over all splits on j of
// (node_rows / total_rows) * Gini decrease, accumulated across trees and
// normalized once at the end.
TreeEnsembleModel tree_importance(const Matrix& X, const std::vector<int>& y_class,
                                  int n_estimators = 10, std::uint64_t seed = 0);

// Majority vote across trees; ties go to the smaller class label.
int tree_predict(const TreeEnsembleModel& model, std::span<const double> x);

}  // namespace stepcast::models
