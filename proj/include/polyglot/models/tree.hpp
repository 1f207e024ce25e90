#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polyglot/features.hpp"

namespace polyglot::models {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> class_counts;  // classification leaves
    double value = 0.0;                // regression leaves
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int dim = 0;
    int n_classes = 0;  // 0 for regression trees

    bool empty() const { return nodes.empty(); }
    int leaf_index(const SparseVector& x) const;
    // majority class of the reached leaf, ties broken by lowest class code
    int predict_class(const SparseVector& x) const;
    double predict_value(const SparseVector& x) const;
    int depth() const;
};

struct TreeParams {
    int max_depth = 6;           // 0 = unlimited
    int min_samples_leaf = 1;    // gini criterion
    int features_per_split = 0;  // 0 = consider every feature
    std::uint64_t seed = 0;
    // second-order criterion
    double lambda_l2 = 1.0;
    double alpha_l1 = 0.0;
    double min_split_gain = 0.0;  // gamma: pre-prune floor on raw gain
    double min_child_weight = 0.0;
};

// Greedy CART on the Gini criterion. `samples` are row indices, repeats
// allowed (bootstrap). Splits use x <= threshold with thresholds at
// midpoints of consecutive distinct observed values; implicit zeros of the
// sparse rows take the zero-value side. Ties break toward the lowest
// feature index, then the lowest threshold.
DecisionTree fit_tree_gini(const FeatureMatrix& matrix, std::span<const int> samples,
                           const TreeParams& params);

// Greedy regression tree on the second-order gain
//   1/2 [ GL^2/(HL+lambda) + GR^2/(HR+lambda) - (GL+GR)^2/(HL+HR+lambda) ]
// accepted only when the raw gain exceeds min_split_gain and both children
// carry hessian mass >= min_child_weight. Leaf weight is
// -soft_threshold(G, alpha) / (H + lambda).
DecisionTree fit_tree_second_order(const FeatureMatrix& matrix, std::span<const int> samples,
                                   std::span<const double> grad, std::span<const double> hess,
                                   const TreeParams& params);

double soft_threshold(double g, double alpha);
double leaf_weight(double grad_sum, double hess_sum, double lambda_l2, double alpha_l1);

// 1 - sum(p_c^2) over the class counts
double gini_impurity(std::span<const double> class_counts);

}  // namespace polyglot::models
