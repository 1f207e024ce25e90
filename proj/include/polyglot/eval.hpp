#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "polyglot/features.hpp"

namespace polyglot::eval {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per class, round-half-up(train_fraction * n_c) samples go to train, the
// rest to test. Classes with fewer than 2 samples are an error named after
// the class.
Split stratified_holdout(std::span<const int> labels, int n_classes, const SplitSpec& spec,
                         const std::vector<std::string>& class_names = {});

// Disjoint folds covering every index; per class the fold sizes differ by
// at most one. Every class needs >= k samples.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, int n_classes,
                                                       int k, std::uint64_t seed,
                                                       const std::vector<std::string>& class_names = {});

struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<std::vector<long long>> counts;  // [true][predicted]

    long long total() const;
    long long trace() const;
    long long row_sum(int c) const;
    long long col_sum(int c) const;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int n_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long support = 0;
    bool zero_division = false;  // set when precision or recall had a 0/0
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

// ---- random hyperparameter search ----------------------------------------

struct ParamRange {
    enum class Kind { integer, real, log_real };
    Kind kind = Kind::real;
    double lo = 0.0;
    double hi = 1.0;
};

using ParamSpace = std::map<std::string, ParamRange>;  // ordered for determinism
using ParamConfig = std::map<std::string, double>;

struct TrialResult {
    ParamConfig config;
    std::vector<double> fold_scores;
    double mean_accuracy = 0.0;
    bool failed = false;
    std::string error;
};

struct SearchResult {
    std::vector<TrialResult> trials;
    std::size_t best_index = 0;

    const TrialResult& best() const { return trials[best_index]; }
};

// trainer(train_matrix, config) returns a predictor for single vectors
using Predictor = std::function<int(const SparseVector&)>;
using TrainerFn = std::function<Predictor(const FeatureMatrix&, const ParamConfig&)>;

// Samples `budget` configs uniformly (log-uniformly where declared), scores
// each by mean stratified-k-fold accuracy and returns the argmax (ties fall
// to the earliest trial). Failing trials are recorded and skipped; if every
// trial fails the search itself fails.
SearchResult random_search(const ParamSpace& space, int budget, int folds, std::uint64_t seed,
                           const FeatureMatrix& matrix, const TrainerFn& trainer);

// Rows/labels of `matrix` restricted to `indices`, preserving order.
FeatureMatrix submatrix(const FeatureMatrix& matrix, std::span<const std::size_t> indices);

// ---- rendering ------------------------------------------------------------

// Aligned table with Programming / Precision / Recall / F1-score columns,
// two decimals, sorted by descending F1; accuracy and macro rows follow.
std::string render_metrics_table(const MetricsReport& report,
                                 const std::vector<std::string>& class_names);

// CSV with a header row of class names; `percent` row-normalizes to
// percentages with two decimals.
std::string render_confusion_csv(const ConfusionMatrix& cm,
                                 const std::vector<std::string>& class_names, bool percent = false);

}  // namespace polyglot::eval
