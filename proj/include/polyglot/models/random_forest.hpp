#pragma once

#include <cstdint>
#include <vector>

#include "polyglot/models/tree.hpp"

namespace polyglot::models {

struct ForestParams {
    int n_estimators = 100;
    int max_depth = 0;           // 0 = unlimited
    int features_per_split = 0;  // 0 = ceil(sqrt(V))
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;
};

struct RandomForestModel {
    ForestParams params;
    int n_classes = 0;
    int dim = 0;
    std::vector<DecisionTree> trees;

    // plurality vote over the trees' leaf-majority classes; vote ties break
    // toward the lowest class code
    int predict(const SparseVector& x) const;
};

// Each tree trains on a bootstrap sample of size N drawn with replacement,
// with features_per_split candidates per node. Tree t derives its RNG from
// (seed, t), so results are identical no matter how many workers run.
RandomForestModel rf_fit(const FeatureMatrix& matrix, const ForestParams& params,
                         int workers = 1);

}  // namespace polyglot::models
