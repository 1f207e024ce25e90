#pragma once

#include <vector>

#include "polyglot/features.hpp"

namespace polyglot::models {

// Multinomial naive Bayes over tf-idf weights with Laplace smoothing.
struct NaiveBayesModel {
    double alpha = 1.0;
    int n_classes = 0;
    int dim = 0;
    std::vector<double> class_log_prior;
    std::vector<std::vector<double>> term_log_prob;  // [class][term]

    std::vector<double> predict_proba(const SparseVector& x) const;
    int predict(const SparseVector& x) const;
};

// priors from class frequency, P(t|c) = (weight(t,c) + alpha) / (total_c + alpha*V).
// Every class in [0, n_classes) must be present in the training data.
NaiveBayesModel nb_fit(const FeatureMatrix& matrix, double alpha);

}  // namespace polyglot::models
