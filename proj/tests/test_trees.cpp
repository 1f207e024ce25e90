#include <doctest.h>

#include <cmath>

#include "polyglot/models/boosted.hpp"
#include "polyglot/models/random_forest.hpp"
#include "polyglot/models/store.hpp"
#include "polyglot/models/tree.hpp"
#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

using namespace polyglot;
using namespace polyglot::models;

namespace {

// Classes A at {0.0, 0.1}, B at {1.0, 1.1} on a single feature. The zero
// is implicit in the sparse row.
FeatureMatrix separable_1d() {
    FeatureMatrix m;
    m.dim = 1;
    m.n_classes = 2;
    m.rows = {SparseVector{{}, 1}, SparseVector{{{0, 0.1}}, 1}, SparseVector{{{0, 1.0}}, 1},
              SparseVector{{{0, 1.1}}, 1}};
    m.labels = {0, 0, 1, 1};
    return m;
}

std::vector<int> identity_samples(std::size_t n) {
    std::vector<int> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<int>(i);
    return s;
}

}  // namespace

TEST_CASE("gini impurity of (2,2) is 0.5") {
    const std::vector<double> counts = {2.0, 2.0};
    CHECK(gini_impurity(counts) == doctest::Approx(0.5).epsilon(1e-12));
    const std::vector<double> pure = {4.0, 0.0};
    CHECK(gini_impurity(pure) == doctest::Approx(0.0));
}

TEST_CASE("separable 1-D data yields a depth-1 tree with a clean threshold") {
    const auto m = separable_1d();
    const auto samples = identity_samples(4);
    TreeParams params;
    params.max_depth = 0;
    const auto tree = fit_tree_gini(m, samples, params);
    CHECK(tree.depth() == 1);
    REQUIRE(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold > 0.1);
    CHECK(tree.nodes[0].threshold < 1.0);
    for (std::size_t i = 0; i < m.rows.size(); ++i)
        CHECK(tree.predict_class(m.rows[i]) == m.labels[i]);
}

TEST_CASE("pure input gives a single leaf whose counts equal the sample count") {
    auto m = separable_1d();
    m.labels = {0, 0, 0, 0};
    m.n_classes = 1;
    const auto samples = identity_samples(4);
    const auto tree = fit_tree_gini(m, samples, TreeParams{});
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
    CHECK(tree.nodes[0].class_counts[0] == doctest::Approx(4.0));
}

TEST_CASE("max_depth caps growth") {
    FeatureMatrix m;
    m.dim = 1;
    m.n_classes = 4;
    m.rows = {SparseVector{{{0, 1.0}}, 1}, SparseVector{{{0, 2.0}}, 1},
              SparseVector{{{0, 3.0}}, 1}, SparseVector{{{0, 4.0}}, 1}};
    m.labels = {0, 1, 2, 3};
    TreeParams params;
    params.max_depth = 1;
    const auto tree = fit_tree_gini(m, identity_samples(4), params);
    CHECK(tree.depth() == 1);
    params.max_depth = 0;
    const auto full = fit_tree_gini(m, identity_samples(4), params);
    // equal-gain candidates resolve to the lowest threshold, so the greedy
    // tree peels one class per level
    CHECK(full.depth() == 3);
    for (std::size_t i = 0; i < m.rows.size(); ++i)
        CHECK(full.predict_class(m.rows[i]) == m.labels[i]);
}

TEST_CASE("tie on gain breaks toward the lowest feature index") {
    // two identical features; both give the same impurity decrease
    FeatureMatrix m;
    m.dim = 3;
    m.n_classes = 2;
    m.rows = {SparseVector{{{1, 1.0}, {2, 1.0}}, 3}, SparseVector{{{1, 1.0}, {2, 1.0}}, 3},
              SparseVector{{}, 3}, SparseVector{{}, 3}};
    m.labels = {0, 0, 1, 1};
    const auto tree = fit_tree_gini(m, identity_samples(4), TreeParams{});
    REQUIRE(tree.nodes[0].feature >= 0);
    CHECK(tree.nodes[0].feature == 1);
}

TEST_CASE("second-order split maximizes the stated gain and prices leaves") {
    // gradients force a split between slots {0,1} and {2,3}
    FeatureMatrix m = separable_1d();
    const auto samples = identity_samples(4);
    const std::vector<double> grad = {-1.0, -1.0, 1.0, 1.0};
    const std::vector<double> hess = {0.25, 0.25, 0.25, 0.25};
    TreeParams params;
    params.lambda_l2 = 1.0;
    params.min_child_weight = 0.0;
    const auto tree = fit_tree_second_order(m, samples, grad, hess, params);
    REQUIRE(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold > 0.1);
    CHECK(tree.nodes[0].threshold < 1.0);
    // leaf weight = -G/(H+lambda) = 2/(0.5+1) on the left
    const auto left = tree.nodes[static_cast<std::size_t>(tree.nodes[0].left)];
    CHECK(left.value == doctest::Approx(2.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("min_child_weight blocks splits with light children") {
    FeatureMatrix m = separable_1d();
    const std::vector<double> grad = {-1.0, -1.0, 1.0, 1.0};
    const std::vector<double> hess = {0.25, 0.25, 0.25, 0.25};
    TreeParams params;
    params.min_child_weight = 1.0;  // each side only carries 0.5
    const auto tree = fit_tree_second_order(m, identity_samples(4), grad, hess, params);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
}

TEST_CASE("gamma is a floor on the raw gain") {
    FeatureMatrix m = separable_1d();
    const std::vector<double> grad = {-1.0, -1.0, 1.0, 1.0};
    const std::vector<double> hess = {0.25, 0.25, 0.25, 0.25};
    TreeParams params;
    params.min_child_weight = 0.0;
    params.min_split_gain = 1e9;
    const auto tree = fit_tree_second_order(m, identity_samples(4), grad, hess, params);
    CHECK(tree.nodes.size() == 1);
}

TEST_CASE("leaf weights shrink with lambda and saturate with alpha") {
    for (const double g : {-3.0, -0.4, 0.0, 0.4, 3.0}) {
        for (const double h : {0.1, 1.0, 10.0}) {
            double prev = std::abs(leaf_weight(g, h, 0.0, 0.0));
            for (const double lambda : {0.5, 1.0, 2.0, 8.0}) {
                const double cur = std::abs(leaf_weight(g, h, lambda, 0.0));
                CHECK(cur <= prev + 1e-15);
                prev = cur;
            }
        }
    }
    CHECK(soft_threshold(2.0, 0.5) == doctest::Approx(1.5));
    CHECK(soft_threshold(-2.0, 0.5) == doctest::Approx(-1.5));
    CHECK(soft_threshold(0.3, 0.5) == 0.0);
    CHECK(leaf_weight(0.3, 1.0, 1.0, 0.5) == 0.0);
}

TEST_CASE("forest of one tree matches that tree everywhere") {
    const auto m = separable_1d();
    ForestParams params;
    params.n_estimators = 1;
    params.seed = 3;
    const auto model = rf_fit(m, params);
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        SparseVector v{{{0, rng.uniform(-0.5, 1.5)}}, 1};
        CHECK(model.predict(v) == model.trees[0].predict_class(v));
    }
}

TEST_CASE("same seed grows identical forests") {
    const auto m = separable_1d();
    ForestParams params;
    params.n_estimators = 7;
    params.seed = 11;
    const auto a = rf_fit(m, params);
    const auto b = rf_fit(m, params);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
            CHECK(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
            CHECK(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
            CHECK(a.trees[t].nodes[n].class_counts == b.trees[t].nodes[n].class_counts);
        }
    }
}

TEST_CASE("a hundred trees nail the separable data") {
    const auto m = separable_1d();
    ForestParams params;
    params.n_estimators = 100;
    params.seed = 5;
    const auto model = rf_fit(m, params);
    for (std::size_t i = 0; i < m.rows.size(); ++i)
        CHECK(model.predict(m.rows[i]) == m.labels[i]);
}

TEST_CASE("plurality voting and its tie-break") {
    DecisionTree votes_a;
    votes_a.dim = 1;
    votes_a.n_classes = 2;
    votes_a.nodes = {TreeNode{-1, 0.0, -1, -1, {5.0, 0.0}, 0.0}};
    DecisionTree votes_b = votes_a;
    votes_b.nodes[0].class_counts = {0.0, 5.0};

    RandomForestModel model;
    model.n_classes = 2;
    model.dim = 1;
    SUBCASE("majority wins: votes A, A, B") {
        model.trees = {votes_a, votes_a, votes_b};
        CHECK(model.predict(SparseVector{{}, 1}) == 0);
        model.trees = {votes_b, votes_a, votes_b};
        CHECK(model.predict(SparseVector{{}, 1}) == 1);
    }
    SUBCASE("a tied vote falls to the lowest class code") {
        model.trees = {votes_a, votes_b};
        CHECK(model.predict(SparseVector{{}, 1}) == 0);
    }
}

TEST_CASE("boosting reduces the training loss and fits separable data") {
    const auto m = separable_1d();
    BoostedParams params;
    params.n_rounds = 10;
    params.eta = 0.5;
    params.min_child_weight = 0.0;
    const auto model = gbt_fit(m, params);
    REQUIRE(model.train_loss.size() == 11);
    CHECK(model.train_loss[1] < model.train_loss[0]);
    for (std::size_t r = 1; r < model.train_loss.size(); ++r)
        CHECK(model.train_loss[r] <= model.train_loss[r - 1] + 1e-12);
    for (std::size_t i = 0; i < m.rows.size(); ++i)
        CHECK(model.predict(m.rows[i]) == m.labels[i]);
}

TEST_CASE("a zero-round model predicts softmax of the base score") {
    BoostedModel model;
    model.n_classes = 4;
    model.dim = 1;
    model.base_score = {0.0, 0.0, 0.0, 0.0};
    const auto p = model.predict_proba(SparseVector{{}, 1});
    for (const double x : p) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("boosted probabilities sum to one") {
    const auto m = separable_1d();
    BoostedParams params;
    params.n_rounds = 5;
    params.min_child_weight = 0.0;
    const auto model = gbt_fit(m, params);
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        SparseVector v{{{0, rng.uniform(-1.0, 2.0)}}, 1};
        const auto p = model.predict_proba(v);
        double sum = 0.0;
        for (const double x : p) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("boosting hyperparameter preconditions") {
    const auto m = separable_1d();
    BoostedParams params;
    params.n_rounds = 0;
    CHECK_THROWS_AS(gbt_fit(m, params), ConfigError);
    params.n_rounds = 1;
    params.eta = 1.5;
    CHECK_THROWS_AS(gbt_fit(m, params), ConfigError);
    params.eta = 0.3;
    params.lambda_l2 = -1.0;
    CHECK_THROWS_AS(gbt_fit(m, params), ConfigError);
}

TEST_CASE("fitted models survive the JSON store with identical predictions") {
    const auto m = separable_1d();
    Rng rng(41);
    std::vector<SparseVector> queries;
    for (int i = 0; i < 50; ++i) queries.push_back(SparseVector{{{0, rng.uniform(-1, 2)}}, 1});

    const std::string path = "test_model_tmp.json";
    SUBCASE("random forest") {
        ForestParams params;
        params.n_estimators = 9;
        params.seed = 2;
        ModelArtifact artifact;
        artifact.channel = "code";
        artifact.class_names = {"c", "java"};
        artifact.model = rf_fit(m, params);
        save_model(artifact, path);
        const auto loaded = load_model(path);
        CHECK(loaded.model_type() == "rf");
        for (const auto& q : queries) CHECK(loaded.predict(q) == artifact.predict(q));
    }
    SUBCASE("boosted trees") {
        BoostedParams params;
        params.n_rounds = 4;
        params.min_child_weight = 0.0;
        ModelArtifact artifact;
        artifact.channel = "code";
        artifact.class_names = {"c", "java"};
        artifact.model = gbt_fit(m, params);
        save_model(artifact, path);
        const auto loaded = load_model(path);
        CHECK(loaded.model_type() == "gbt");
        for (const auto& q : queries) {
            CHECK(loaded.predict(q) == artifact.predict(q));
            const auto pa = loaded.predict_proba(q);
            const auto pb = artifact.predict_proba(q);
            for (std::size_t c = 0; c < pa.size(); ++c)
                CHECK(pa[c] == doctest::Approx(pb[c]).epsilon(1e-12));
        }
    }
    SUBCASE("naive bayes") {
        ModelArtifact artifact;
        artifact.channel = "code";
        artifact.class_names = {"c", "java"};
        artifact.model = nb_fit(m, 1.0);
        save_model(artifact, path);
        const auto loaded = load_model(path);
        CHECK(loaded.model_type() == "nb");
        for (const auto& q : queries) CHECK(loaded.predict(q) == artifact.predict(q));
    }
    std::remove(path.c_str());
}
