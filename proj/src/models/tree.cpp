#include "polyglot/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::models {

int DecisionTree::leaf_index(const SparseVector& x) const {
    if (x.dim != dim) throw DimensionMismatch("tree expects dim " + std::to_string(dim) +
                                              ", got " + std::to_string(x.dim));
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(at)];
        at = x.at(n.feature) <= n.threshold ? n.left : n.right;
    }
    return at;
}

int DecisionTree::predict_class(const SparseVector& x) const {
    const auto& counts = nodes[static_cast<std::size_t>(leaf_index(x))].class_counts;
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    return best;
}

double DecisionTree::predict_value(const SparseVector& x) const {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
}

int DecisionTree::depth() const {
    std::function<int(int)> walk = [&](int at) -> int {
        const auto& n = nodes[static_cast<std::size_t>(at)];
        if (n.feature < 0) return 0;
        return 1 + std::max(walk(n.left), walk(n.right));
    };
    return nodes.empty() ? 0 : walk(0);
}

double gini_impurity(std::span<const double> class_counts) {
    double total = 0.0;
    for (const double c : class_counts) total += c;
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (const double c : class_counts) {
        const double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

double soft_threshold(double g, double alpha) {
    if (g > alpha) return g - alpha;
    if (g < -alpha) return g + alpha;
    return 0.0;
}

double leaf_weight(double grad_sum, double hess_sum, double lambda_l2, double alpha_l1) {
    return -soft_threshold(grad_sum, alpha_l1) / (hess_sum + lambda_l2);
}

namespace {

// Per-node gather of explicit feature values. `by_feature` is a persistent
// workspace indexed by feature; only the touched slots are cleared after
// each node, keeping node cost proportional to its nonzeros.
struct Gather {
    std::vector<std::vector<std::pair<double, int>>> by_feature;  // (value, slot)
    std::vector<int> touched;

    explicit Gather(int dim) : by_feature(static_cast<std::size_t>(dim)) {}

    void collect(const FeatureMatrix& m, std::span<const int> samples,
                 std::span<const int> slots) {
        for (const int slot : slots) {
            const auto& row = m.rows[static_cast<std::size_t>(samples[static_cast<std::size_t>(slot)])];
            for (const auto& [f, v] : row.entries) {
                auto& bucket = by_feature[static_cast<std::size_t>(f)];
                if (bucket.empty()) touched.push_back(f);
                bucket.emplace_back(v, slot);
            }
        }
        std::sort(touched.begin(), touched.end());
    }

    void reset() {
        for (const int f : touched) by_feature[static_cast<std::size_t>(f)].clear();
        touched.clear();
    }
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // impurity decrease or raw second-order gain
};

struct GiniBuilder {
    const FeatureMatrix& m;
    std::span<const int> samples;
    const TreeParams& params;
    Rng rng;
    Gather gather;
    DecisionTree tree;
    std::vector<double> zero_counts;  // scratch, per class

    GiniBuilder(const FeatureMatrix& mat, std::span<const int> smp, const TreeParams& p)
        : m(mat), samples(smp), params(p), rng(p.seed), gather(mat.dim) {
        tree.dim = mat.dim;
        tree.n_classes = mat.n_classes;
    }

    static double gini(const std::vector<double>& counts, double total) {
        if (total <= 0.0) return 0.0;
        double s = 0.0;
        for (const double c : counts) {
            const double p = c / total;
            s += p * p;
        }
        return 1.0 - s;
    }

    int label_of(int slot) const {
        return m.labels[static_cast<std::size_t>(samples[static_cast<std::size_t>(slot)])];
    }

    // Scans one feature's candidate thresholds; updates best in place.
    void scan_feature(int f, std::span<const int> slots, const std::vector<double>& node_counts,
                      double parent_impurity, SplitChoice& best) {
        auto& vals = gather.by_feature[static_cast<std::size_t>(f)];
        if (vals.empty()) return;
        std::sort(vals.begin(), vals.end());
        const double n = static_cast<double>(slots.size());
        const double zero_n = n - static_cast<double>(vals.size());

        std::fill(zero_counts.begin(), zero_counts.end(), 0.0);
        if (zero_n > 0.0) {
            // classes of the implicit-zero samples = node minus explicit
            zero_counts = node_counts;
            for (const auto& [v, slot] : vals)
                zero_counts[static_cast<std::size_t>(label_of(slot))] -= 1.0;
        }

        std::vector<double> left = zero_n > 0.0 ? zero_counts : std::vector<double>(node_counts.size(), 0.0);
        double left_n = zero_n;
        double prev = 0.0;
        bool have_prev = zero_n > 0.0;

        std::size_t i = 0;
        while (i < vals.size()) {
            const double v = vals[i].first;
            if (have_prev && v > prev) {
                const double threshold = (prev + v) / 2.0;
                const double right_n = n - left_n;
                if (left_n >= params.min_samples_leaf && right_n >= params.min_samples_leaf) {
                    double left_imp = gini(left, left_n);
                    double right_imp = 0.0;
                    {
                        double s = 0.0;
                        for (std::size_t c = 0; c < left.size(); ++c) {
                            const double rc = node_counts[c] - left[c];
                            const double p = rc / right_n;
                            s += p * p;
                        }
                        right_imp = 1.0 - s;
                    }
                    const double decrease =
                        parent_impurity - (left_n * left_imp + right_n * right_imp) / n;
                    const double floor = best.found ? best.score : 1e-12;
                    if (decrease > floor) {
                        best.found = true;
                        best.feature = f;
                        best.threshold = threshold;
                        best.score = decrease;
                    }
                }
            }
            // absorb the whole run of equal values into the left side
            while (i < vals.size() && vals[i].first == v) {
                left[static_cast<std::size_t>(label_of(vals[i].second))] += 1.0;
                left_n += 1.0;
                ++i;
            }
            prev = v;
            have_prev = true;
        }
    }

    int build(std::vector<int>& slots, int depth) {
        std::vector<double> counts(static_cast<std::size_t>(m.n_classes), 0.0);
        for (const int s : slots) counts[static_cast<std::size_t>(label_of(s))] += 1.0;
        const double n = static_cast<double>(slots.size());
        const double impurity = gini(counts, n);

        const bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
        SplitChoice best;
        if (depth_ok && impurity > 0.0 && slots.size() >= 2) {
            gather.collect(m, samples, slots);
            if (params.features_per_split > 0 &&
                params.features_per_split < m.dim) {
                std::vector<std::size_t> cand;
                rng.sample_indices(static_cast<std::size_t>(m.dim),
                                   static_cast<std::size_t>(params.features_per_split),
                                   std::back_inserter(cand));
                std::sort(cand.begin(), cand.end());
                for (const std::size_t f : cand)
                    scan_feature(static_cast<int>(f), slots, counts, impurity, best);
            } else {
                for (const int f : gather.touched) scan_feature(f, slots, counts, impurity, best);
            }
            gather.reset();
        }

        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (!best.found) {
            tree.nodes[static_cast<std::size_t>(index)].class_counts = std::move(counts);
            return index;
        }

        std::vector<int> left_slots, right_slots;
        for (const int s : slots) {
            const auto& row = m.rows[static_cast<std::size_t>(samples[static_cast<std::size_t>(s)])];
            (row.at(best.feature) <= best.threshold ? left_slots : right_slots).push_back(s);
        }
        slots.clear();
        slots.shrink_to_fit();

        tree.nodes[static_cast<std::size_t>(index)].feature = best.feature;
        tree.nodes[static_cast<std::size_t>(index)].threshold = best.threshold;
        const int left = build(left_slots, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        const int right = build(right_slots, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

struct SecondOrderBuilder {
    const FeatureMatrix& m;
    std::span<const int> samples;
    std::span<const double> grad;
    std::span<const double> hess;
    const TreeParams& params;
    Gather gather;
    DecisionTree tree;

    SecondOrderBuilder(const FeatureMatrix& mat, std::span<const int> smp,
                       std::span<const double> g, std::span<const double> h, const TreeParams& p)
        : m(mat), samples(smp), grad(g), hess(h), params(p), gather(mat.dim) {
        tree.dim = mat.dim;
        tree.n_classes = 0;
    }

    double score(double g, double h) const { return g * g / (h + params.lambda_l2); }

    void scan_feature(int f, std::span<const int> slots, double total_g, double total_h,
                      SplitChoice& best) {
        auto& vals = gather.by_feature[static_cast<std::size_t>(f)];
        if (vals.empty()) return;
        std::sort(vals.begin(), vals.end());
        const double zero_n = static_cast<double>(slots.size()) - static_cast<double>(vals.size());

        double left_g = 0.0, left_h = 0.0;
        if (zero_n > 0.0) {
            left_g = total_g;
            left_h = total_h;
            for (const auto& [v, slot] : vals) {
                left_g -= grad[static_cast<std::size_t>(slot)];
                left_h -= hess[static_cast<std::size_t>(slot)];
            }
        }
        const double parent_score = score(total_g, total_h);

        double prev = 0.0;
        bool have_prev = zero_n > 0.0;
        std::size_t i = 0;
        while (i < vals.size()) {
            const double v = vals[i].first;
            if (have_prev && v > prev) {
                const double threshold = (prev + v) / 2.0;
                const double right_g = total_g - left_g;
                const double right_h = total_h - left_h;
                if (left_h >= params.min_child_weight && right_h >= params.min_child_weight) {
                    const double gain =
                        0.5 * (score(left_g, left_h) + score(right_g, right_h) - parent_score);
                    if (gain > params.min_split_gain &&
                        (!best.found || gain > best.score)) {
                        best.found = true;
                        best.feature = f;
                        best.threshold = threshold;
                        best.score = gain;
                    }
                }
            }
            while (i < vals.size() && vals[i].first == v) {
                left_g += grad[static_cast<std::size_t>(vals[i].second)];
                left_h += hess[static_cast<std::size_t>(vals[i].second)];
                ++i;
            }
            prev = v;
            have_prev = true;
        }
    }

    int build(std::vector<int>& slots, int depth) {
        double total_g = 0.0, total_h = 0.0;
        for (const int s : slots) {
            total_g += grad[static_cast<std::size_t>(s)];
            total_h += hess[static_cast<std::size_t>(s)];
        }

        const bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
        SplitChoice best;
        if (depth_ok && slots.size() >= 2) {
            gather.collect(m, samples, slots);
            for (const int f : gather.touched) scan_feature(f, slots, total_g, total_h, best);
            gather.reset();
        }

        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (!best.found) {
            tree.nodes[static_cast<std::size_t>(index)].value =
                leaf_weight(total_g, total_h, params.lambda_l2, params.alpha_l1);
            return index;
        }

        std::vector<int> left_slots, right_slots;
        for (const int s : slots) {
            const auto& row = m.rows[static_cast<std::size_t>(samples[static_cast<std::size_t>(s)])];
            (row.at(best.feature) <= best.threshold ? left_slots : right_slots).push_back(s);
        }
        slots.clear();
        slots.shrink_to_fit();

        tree.nodes[static_cast<std::size_t>(index)].feature = best.feature;
        tree.nodes[static_cast<std::size_t>(index)].threshold = best.threshold;
        const int left = build(left_slots, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        const int right = build(right_slots, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

}  // namespace

DecisionTree fit_tree_gini(const FeatureMatrix& matrix, std::span<const int> samples,
                           const TreeParams& params) {
    if (matrix.rows.empty() || samples.empty()) throw DataError("fit_tree_gini: no samples");
    GiniBuilder builder(matrix, samples, params);
    builder.zero_counts.assign(static_cast<std::size_t>(matrix.n_classes), 0.0);
    std::vector<int> slots(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) slots[i] = static_cast<int>(i);
    builder.build(slots, 0);
    return std::move(builder.tree);
}

DecisionTree fit_tree_second_order(const FeatureMatrix& matrix, std::span<const int> samples,
                                   std::span<const double> grad, std::span<const double> hess,
                                   const TreeParams& params) {
    if (matrix.rows.empty() || samples.empty())
        throw DataError("fit_tree_second_order: no samples");
    if (grad.size() != samples.size() || hess.size() != samples.size())
        throw DimensionMismatch("fit_tree_second_order: grad/hess size mismatch");
    SecondOrderBuilder builder(matrix, samples, grad, hess, params);
    std::vector<int> slots(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) slots[i] = static_cast<int>(i);
    builder.build(slots, 0);
    return std::move(builder.tree);
}

}  // namespace polyglot::models
