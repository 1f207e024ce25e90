#include "polyglot/models/boosted.hpp"

#include <cmath>

#include "polyglot/models/softmax.hpp"
#include "polyglot/util/errors.hpp"
#include "polyglot/util/parallel.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::models {

BoostedModel gbt_fit(const FeatureMatrix& matrix, const BoostedParams& params, int workers) {
    if (params.n_rounds < 1) throw ConfigError("gbt_fit: n_rounds must be >= 1");
    if (params.eta <= 0.0 || params.eta > 1.0) throw ConfigError("gbt_fit: eta must be in (0,1]");
    if (params.lambda_l2 < 0.0) throw ConfigError("gbt_fit: lambda must be >= 0");
    if (matrix.rows.empty()) throw DataError("gbt_fit: empty training matrix");

    const std::size_t n = matrix.rows.size();
    const int k = matrix.n_classes;

    BoostedModel model;
    model.params = params;
    model.n_classes = k;
    model.dim = matrix.dim;

    std::vector<double> class_count(static_cast<std::size_t>(k), 0.0);
    for (const int label : matrix.labels) class_count[static_cast<std::size_t>(label)] += 1.0;
    model.base_score.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        if (class_count[static_cast<std::size_t>(c)] == 0.0)
            throw DataError("gbt_fit: class " + std::to_string(c) + " has no training samples");
        model.base_score[static_cast<std::size_t>(c)] =
            std::log(class_count[static_cast<std::size_t>(c)] / static_cast<double>(n));
    }

    // scores[i*k + c]
    std::vector<double> scores(n * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            scores[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] =
                model.base_score[static_cast<std::size_t>(c)];

    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);

    std::vector<double> probs(n * static_cast<std::size_t>(k));
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(k), std::vector<double>(n));
    std::vector<std::vector<double>> hess(static_cast<std::size_t>(k), std::vector<double>(n));

    auto mean_loss = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> row(scores.data() + i * static_cast<std::size_t>(k),
                                              static_cast<std::size_t>(k));
            loss += softmax_log_loss(row, matrix.labels[i]);
        }
        return loss / static_cast<double>(n);
    };
    model.train_loss.push_back(mean_loss());

    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.lambda_l2 = params.lambda_l2;
    tp.alpha_l1 = params.alpha_l1;
    tp.min_split_gain = params.min_split_gain;
    tp.min_child_weight = params.min_child_weight;

    for (int round = 0; round < params.n_rounds; ++round) {
        // probabilities at the state the whole round sees
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> row(scores.data() + i * static_cast<std::size_t>(k),
                                              static_cast<std::size_t>(k));
            const auto p = softmax(row);
            for (int c = 0; c < k; ++c) {
                const double pc = p[static_cast<std::size_t>(c)];
                probs[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] = pc;
                grad[static_cast<std::size_t>(c)][i] =
                    pc - (matrix.labels[i] == c ? 1.0 : 0.0);
                hess[static_cast<std::size_t>(c)][i] = pc * (1.0 - pc);
            }
        }

        auto& round_trees = model.rounds.emplace_back(static_cast<std::size_t>(k));
        parallel_for(static_cast<std::size_t>(k), workers, [&](std::size_t c) {
            round_trees[c] = fit_tree_second_order(matrix, all, grad[c], hess[c], tp);
        });

        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c)
                scores[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] +=
                    params.eta * round_trees[static_cast<std::size_t>(c)].predict_value(matrix.rows[i]);

        model.train_loss.push_back(mean_loss());
    }
    return model;
}

std::vector<double> BoostedModel::scores(const SparseVector& x) const {
    if (x.dim != dim)
        throw DimensionMismatch("gbt_predict: expected dim " + std::to_string(dim) + ", got " +
                                std::to_string(x.dim));
    std::vector<double> s = base_score;
    for (const auto& round : rounds)
        for (int c = 0; c < n_classes; ++c)
            s[static_cast<std::size_t>(c)] +=
                params.eta * round[static_cast<std::size_t>(c)].predict_value(x);
    return s;
}

std::vector<double> BoostedModel::predict_proba(const SparseVector& x) const {
    return softmax(scores(x));
}

int BoostedModel::predict(const SparseVector& x) const {
    const auto p = predict_proba(x);
    int best = 0;
    for (int c = 1; c < n_classes; ++c)
        if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
    return best;
}

}  // namespace polyglot::models
