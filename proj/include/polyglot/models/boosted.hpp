#pragma once

#include <cstdint>
#include <vector>

#include "polyglot/models/tree.hpp"

namespace polyglot::models {

struct BoostedParams {
    int n_rounds = 50;
    double eta = 0.3;
    double lambda_l2 = 1.0;
    double alpha_l1 = 0.0;
    double min_split_gain = 0.0;  // gamma
    double min_child_weight = 1.0;
    int max_depth = 6;
    std::uint64_t seed = 0;
};

// Multiclass softmax boosting: each round fits one second-order regression
// tree per class on g = p - y, h = p (1 - p); scores accumulate
// base_score + eta * sum of leaf values.
struct BoostedModel {
    BoostedParams params;
    int n_classes = 0;
    int dim = 0;
    std::vector<double> base_score;                 // log class frequencies
    std::vector<std::vector<DecisionTree>> rounds;  // rounds[r][class]
    std::vector<double> train_loss;                 // mean log-loss; [0] = before round 1

    std::vector<double> scores(const SparseVector& x) const;
    std::vector<double> predict_proba(const SparseVector& x) const;
    int predict(const SparseVector& x) const;
};

BoostedModel gbt_fit(const FeatureMatrix& matrix, const BoostedParams& params, int workers = 1);

}  // namespace polyglot::models
