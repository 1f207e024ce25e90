#include "polyglot/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::eval {

namespace {

std::string class_label(int code, const std::vector<std::string>& names) {
    if (code >= 0 && static_cast<std::size_t>(code) < names.size())
        return names[static_cast<std::size_t>(code)];
    return "class " + std::to_string(code);
}

std::vector<std::vector<std::size_t>> indices_by_class(std::span<const int> labels, int n_classes) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || c >= n_classes)
            throw DataError("label " + std::to_string(c) + " outside [0, " +
                            std::to_string(n_classes) + ")");
        by_class[static_cast<std::size_t>(c)].push_back(i);
    }
    return by_class;
}

}  // namespace

Split stratified_holdout(std::span<const int> labels, int n_classes, const SplitSpec& spec,
                         const std::vector<std::string>& class_names) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw ConfigError("train_fraction must be in (0, 1)");
    auto by_class = indices_by_class(labels, n_classes);
    Split split;
    for (int c = 0; c < n_classes; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.size() < 2)
            throw DataError("stratified_holdout: class '" + class_label(c, class_names) +
                            "' has " + std::to_string(idx.size()) + " sample(s), need at least 2");
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(c)));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        // round-half-up on train_fraction * n_c
        const auto train_n = static_cast<std::size_t>(
            std::floor(spec.train_fraction * static_cast<double>(idx.size()) + 0.5));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < train_n ? split.train : split.test).push_back(idx[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, int n_classes,
                                                       int k, std::uint64_t seed,
                                                       const std::vector<std::string>& class_names) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
    auto by_class = indices_by_class(labels, n_classes);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (int c = 0; c < n_classes; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.size() < static_cast<std::size_t>(k))
            throw DataError("stratified_kfold: class '" + class_label(c, class_names) + "' has " +
                            std::to_string(idx.size()) + " sample(s), need at least " +
                            std::to_string(k));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        for (std::size_t i = 0; i < idx.size(); ++i)
            folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const auto& row : counts)
        for (const long long v : row) t += v;
    return t;
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (int c = 0; c < n_classes; ++c)
        t += counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    return t;
}

long long ConfusionMatrix::row_sum(int c) const {
    long long t = 0;
    for (const long long v : counts[static_cast<std::size_t>(c)]) t += v;
    return t;
}

long long ConfusionMatrix::col_sum(int c) const {
    long long t = 0;
    for (const auto& row : counts) t += row[static_cast<std::size_t>(c)];
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int n_classes) {
    if (truth.size() != predicted.size())
        throw DataError("confusion_matrix: got " + std::to_string(truth.size()) + " true vs " +
                        std::to_string(predicted.size()) + " predicted labels");
    if (truth.empty()) throw DataError("confusion_matrix: empty input");
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(static_cast<std::size_t>(n_classes),
                     std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
            throw DataError("confusion_matrix: label outside [0, " + std::to_string(n_classes) + ")");
        cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]++;
    }
    return cm;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
    const long long total = cm.total();
    if (total <= 0) throw DataError("metrics_from_confusion: empty matrix");
    MetricsReport report;
    report.per_class.resize(static_cast<std::size_t>(cm.n_classes));
    for (int c = 0; c < cm.n_classes; ++c) {
        auto& m = report.per_class[static_cast<std::size_t>(c)];
        const auto diag = static_cast<double>(
            cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]);
        const long long col = cm.col_sum(c);
        const long long row = cm.row_sum(c);
        m.support = row;
        if (col == 0) {
            m.precision = 0.0;
            m.zero_division = true;
        } else {
            m.precision = diag / static_cast<double>(col);
        }
        if (row == 0) {
            m.recall = 0.0;
            m.zero_division = true;
        } else {
            m.recall = diag / static_cast<double>(row);
        }
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        report.macro_precision += m.precision;
        report.macro_recall += m.recall;
        report.macro_f1 += m.f1;
    }
    report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    report.macro_precision /= cm.n_classes;
    report.macro_recall /= cm.n_classes;
    report.macro_f1 /= cm.n_classes;
    return report;
}

FeatureMatrix submatrix(const FeatureMatrix& matrix, std::span<const std::size_t> indices) {
    FeatureMatrix out;
    out.n_classes = matrix.n_classes;
    out.dim = matrix.dim;
    out.channel_dims = matrix.channel_dims;
    out.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (const std::size_t i : indices) {
        out.rows.push_back(matrix.rows[i]);
        out.labels.push_back(matrix.labels[i]);
    }
    return out;
}

SearchResult random_search(const ParamSpace& space, int budget, int folds, std::uint64_t seed,
                           const FeatureMatrix& matrix, const TrainerFn& trainer) {
    if (budget < 1) throw ConfigError("random_search: budget must be >= 1");
    if (folds < 2) throw ConfigError("random_search: folds must be >= 2");
    if (space.empty()) throw ConfigError("random_search: empty parameter space");
    for (const auto& [name, range] : space)
        if (range.hi < range.lo)
            throw ConfigError("random_search: empty range for parameter '" + name + "'");

    const auto fold_sets =
        stratified_kfold(matrix.labels, matrix.n_classes, folds, mix_seed(seed, 0xf01d));

    // fold train/test matrices are shared by every trial
    std::vector<FeatureMatrix> train_mats, test_mats;
    std::vector<std::vector<int>> test_labels(fold_sets.size());
    for (std::size_t f = 0; f < fold_sets.size(); ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < fold_sets.size(); ++g)
            if (g != f) train_idx.insert(train_idx.end(), fold_sets[g].begin(), fold_sets[g].end());
        std::sort(train_idx.begin(), train_idx.end());
        train_mats.push_back(submatrix(matrix, train_idx));
        test_mats.push_back(submatrix(matrix, fold_sets[f]));
        test_labels[f] = test_mats.back().labels;
    }

    Rng rng(mix_seed(seed, 0x5ea6c4));
    SearchResult result;
    bool have_best = false;
    for (int t = 0; t < budget; ++t) {
        TrialResult trial;
        for (const auto& [name, range] : space) {
            double v = 0.0;
            switch (range.kind) {
                case ParamRange::Kind::integer: {
                    const auto span = static_cast<std::uint64_t>(range.hi - range.lo) + 1;
                    v = range.lo + static_cast<double>(rng.below(span));
                    break;
                }
                case ParamRange::Kind::real:
                    v = rng.uniform(range.lo, range.hi);
                    break;
                case ParamRange::Kind::log_real:
                    v = rng.log_uniform(range.lo, range.hi);
                    break;
            }
            trial.config[name] = v;
        }
        try {
            double sum = 0.0;
            for (std::size_t f = 0; f < fold_sets.size(); ++f) {
                const Predictor predict = trainer(train_mats[f], trial.config);
                std::size_t correct = 0;
                for (std::size_t i = 0; i < test_mats[f].rows.size(); ++i)
                    if (predict(test_mats[f].rows[i]) == test_labels[f][i]) correct++;
                const double acc =
                    static_cast<double>(correct) / static_cast<double>(test_mats[f].rows.size());
                trial.fold_scores.push_back(acc);
                sum += acc;
            }
            trial.mean_accuracy = sum / static_cast<double>(fold_sets.size());
        } catch (const std::exception& e) {
            trial.failed = true;
            trial.error = e.what();
            trial.fold_scores.clear();
            trial.mean_accuracy = 0.0;
        }
        result.trials.push_back(std::move(trial));
        const auto& just_added = result.trials.back();
        if (!just_added.failed &&
            (!have_best || just_added.mean_accuracy > result.trials[result.best_index].mean_accuracy)) {
            result.best_index = result.trials.size() - 1;
            have_best = true;
        }
    }
    if (!have_best) throw DataError("random_search: every trial failed");
    return result;
}

std::string render_metrics_table(const MetricsReport& report,
                                 const std::vector<std::string>& class_names) {
    std::vector<int> order(report.per_class.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return report.per_class[static_cast<std::size_t>(a)].f1 >
               report.per_class[static_cast<std::size_t>(b)].f1;
    });

    std::size_t name_width = std::string("Programming").size();
    for (const auto& n : class_names) name_width = std::max(name_width, n.size());

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_width + 2)) << "Programming"
       << std::right << std::setw(10) << "Precision" << std::setw(8) << "Recall"
       << std::setw(10) << "F1-score" << '\n';
    os << std::fixed << std::setprecision(2);
    for (const int c : order) {
        const auto& m = report.per_class[static_cast<std::size_t>(c)];
        os << std::left << std::setw(static_cast<int>(name_width + 2))
           << class_label(c, class_names) << std::right << std::setw(10) << m.precision
           << std::setw(8) << m.recall << std::setw(10) << m.f1 << '\n';
    }
    os << '\n';
    os << "Accuracy: " << std::setprecision(4) << report.accuracy << '\n';
    os << "Macro precision/recall/F1: " << std::setprecision(2) << report.macro_precision << " / "
       << report.macro_recall << " / " << report.macro_f1 << '\n';
    return os.str();
}

std::string render_confusion_csv(const ConfusionMatrix& cm,
                                 const std::vector<std::string>& class_names, bool percent) {
    std::ostringstream os;
    os << "true\\predicted";
    for (int c = 0; c < cm.n_classes; ++c) os << ',' << class_label(c, class_names);
    os << '\n';
    for (int r = 0; r < cm.n_classes; ++r) {
        os << class_label(r, class_names);
        const long long row_total = cm.row_sum(r);
        for (int c = 0; c < cm.n_classes; ++c) {
            const long long v = cm.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (percent) {
                const double pct = row_total > 0
                                       ? 100.0 * static_cast<double>(v) / static_cast<double>(row_total)
                                       : 0.0;
                os << ',' << std::fixed << std::setprecision(2) << pct;
            } else {
                os << ',' << v;
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace polyglot::eval
