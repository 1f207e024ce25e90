#include "polyglot/models/naive_bayes.hpp"

#include <cmath>

#include "polyglot/models/softmax.hpp"
#include "polyglot/util/errors.hpp"

namespace polyglot::models {

NaiveBayesModel nb_fit(const FeatureMatrix& matrix, double alpha) {
    if (alpha <= 0.0) throw ConfigError("nb_fit: alpha must be > 0");
    if (matrix.rows.empty()) throw DataError("nb_fit: empty training matrix");

    NaiveBayesModel model;
    model.alpha = alpha;
    model.n_classes = matrix.n_classes;
    model.dim = matrix.dim;

    std::vector<double> class_count(static_cast<std::size_t>(matrix.n_classes), 0.0);
    std::vector<std::vector<double>> term_weight(
        static_cast<std::size_t>(matrix.n_classes),
        std::vector<double>(static_cast<std::size_t>(matrix.dim), 0.0));
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        const int c = matrix.labels[i];
        class_count[static_cast<std::size_t>(c)] += 1.0;
        for (const auto& [t, w] : matrix.rows[i].entries)
            term_weight[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] += w;
    }
    for (int c = 0; c < matrix.n_classes; ++c) {
        if (class_count[static_cast<std::size_t>(c)] == 0.0)
            throw DataError("nb_fit: class " + std::to_string(c) + " has no training samples");
    }

    const double total = static_cast<double>(matrix.rows.size());
    model.class_log_prior.resize(static_cast<std::size_t>(matrix.n_classes));
    model.term_log_prob.resize(static_cast<std::size_t>(matrix.n_classes));
    for (int c = 0; c < matrix.n_classes; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        model.class_log_prior[ci] = std::log(class_count[ci] / total);
        double class_total = 0.0;
        for (const double w : term_weight[ci]) class_total += w;
        const double denom = class_total + alpha * matrix.dim;
        auto& row = model.term_log_prob[ci];
        row.resize(static_cast<std::size_t>(matrix.dim));
        for (int t = 0; t < matrix.dim; ++t)
            row[static_cast<std::size_t>(t)] =
                std::log((term_weight[ci][static_cast<std::size_t>(t)] + alpha) / denom);
    }
    return model;
}

std::vector<double> NaiveBayesModel::predict_proba(const SparseVector& x) const {
    if (x.dim != dim)
        throw DimensionMismatch("nb_predict: expected dim " + std::to_string(dim) + ", got " +
                                std::to_string(x.dim));
    std::vector<double> log_post(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        double s = class_log_prior[ci];
        for (const auto& [t, w] : x.entries) s += w * term_log_prob[ci][static_cast<std::size_t>(t)];
        log_post[ci] = s;
    }
    return softmax(log_post);
}

int NaiveBayesModel::predict(const SparseVector& x) const {
    const auto p = predict_proba(x);
    int best = 0;
    for (int c = 1; c < n_classes; ++c)
        if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
    return best;
}

}  // namespace polyglot::models
