#include "polyglot/models/random_forest.hpp"

#include <cmath>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/parallel.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::models {

RandomForestModel rf_fit(const FeatureMatrix& matrix, const ForestParams& params, int workers) {
    if (params.n_estimators < 1) throw ConfigError("rf_fit: n_estimators must be >= 1");
    if (matrix.rows.empty()) throw DataError("rf_fit: empty training matrix");

    RandomForestModel model;
    model.params = params;
    model.n_classes = matrix.n_classes;
    model.dim = matrix.dim;
    model.trees.resize(static_cast<std::size_t>(params.n_estimators));

    const int features = params.features_per_split > 0
                             ? params.features_per_split
                             : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(matrix.dim))));
    const std::size_t n = matrix.rows.size();

    parallel_for(static_cast<std::size_t>(params.n_estimators), workers, [&](std::size_t t) {
        Rng rng(mix_seed(params.seed, t));
        std::vector<int> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i)
            bootstrap[i] = static_cast<int>(rng.below(n));
        TreeParams tp;
        tp.max_depth = params.max_depth;
        tp.min_samples_leaf = params.min_samples_leaf;
        tp.features_per_split = features;
        tp.seed = mix_seed(params.seed, t ^ 0x9e3779b97f4a7c15ULL);
        model.trees[t] = fit_tree_gini(matrix, bootstrap, tp);
    });
    return model;
}

int RandomForestModel::predict(const SparseVector& x) const {
    if (x.dim != dim)
        throw DimensionMismatch("rf_predict: expected dim " + std::to_string(dim) + ", got " +
                                std::to_string(x.dim));
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    for (const auto& tree : trees) votes[static_cast<std::size_t>(tree.predict_class(x))]++;
    int best = 0;
    for (int c = 1; c < n_classes; ++c)
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    return best;
}

}  // namespace polyglot::models
