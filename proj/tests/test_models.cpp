#include <doctest.h>

#include <cmath>

#include "polyglot/models/naive_bayes.hpp"
#include "polyglot/models/softmax.hpp"
#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

using namespace polyglot;
using namespace polyglot::models;

namespace {

// Two classes over vocabulary {bar, baz, foo}: X holds "foo foo bar",
// Y holds "baz". Raw counts as weights.
FeatureMatrix hand_corpus() {
    FeatureMatrix m;
    m.dim = 3;  // bar=0, baz=1, foo=2
    m.n_classes = 2;
    m.rows = {SparseVector{{{0, 1.0}, {2, 2.0}}, 3}, SparseVector{{{1, 1.0}}, 3}};
    m.labels = {0, 1};
    return m;
}

}  // namespace

TEST_CASE("naive Bayes matches the closed-form Laplace counts") {
    const auto model = nb_fit(hand_corpus(), 1.0);
    // P(foo|X) = (2+1)/(3+3) = 0.5 ; P(foo|Y) = (0+1)/(1+3) = 0.25
    CHECK(std::exp(model.term_log_prob[0][2]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(model.term_log_prob[1][2]) == doctest::Approx(0.25).epsilon(1e-12));
    // priors are class frequencies
    CHECK(std::exp(model.class_log_prior[0]) == doctest::Approx(0.5).epsilon(1e-12));

    SUBCASE("per class the term distribution sums to 1") {
        for (int c = 0; c < 2; ++c) {
            double sum = 0.0;
            for (const double lp : model.term_log_prob[static_cast<std::size_t>(c)])
                sum += std::exp(lp);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("posterior of the single word foo is (2/3, 1/3)") {
    const auto model = nb_fit(hand_corpus(), 1.0);
    const auto p = model.predict_proba(SparseVector{{{2, 1.0}}, 3});
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(model.predict(SparseVector{{{2, 1.0}}, 3}) == 0);
}

TEST_CASE("single-class corpus gets prior 1") {
    FeatureMatrix m;
    m.dim = 2;
    m.n_classes = 1;
    m.rows = {SparseVector{{{0, 1.0}}, 2}};
    m.labels = {0};
    const auto model = nb_fit(m, 1.0);
    CHECK(std::exp(model.class_log_prior[0]) == doctest::Approx(1.0));
}

TEST_CASE("smoothing is required") {
    CHECK_THROWS_AS(nb_fit(hand_corpus(), 0.0), ConfigError);
}

TEST_CASE("a declared class with no samples is an error naming it") {
    auto m = hand_corpus();
    m.n_classes = 3;
    try {
        nb_fit(m, 1.0);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("zero vector posterior equals the priors") {
    FeatureMatrix m = hand_corpus();
    m.rows.push_back(SparseVector{{{0, 1.0}}, 3});
    m.labels.push_back(0);  // priors become (2/3, 1/3)
    const auto model = nb_fit(m, 1.0);
    const auto p = model.predict_proba(SparseVector{{}, 3});
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("probabilities sum to one for random vectors") {
    const auto model = nb_fit(hand_corpus(), 0.5);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        SparseVector v{{}, 3};
        for (int t = 0; t < 3; ++t)
            if (rng.unit() < 0.6) v.entries.emplace_back(t, rng.unit());
        const auto p = model.predict_proba(v);
        double sum = 0.0;
        for (const double x : p) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("dimension mismatch is rejected") {
    const auto model = nb_fit(hand_corpus(), 1.0);
    CHECK_THROWS_AS(model.predict_proba(SparseVector{{}, 4}), DimensionMismatch);
}

TEST_CASE("softmax gradient and hessian at K=2, p=0.5") {
    const std::vector<double> scores = {0.0, 0.0};
    std::vector<double> g(2), h(2);
    softmax_grad_hess(scores, 1, g, h);
    CHECK(g[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(h[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax gradients match finite differences") {
    Rng rng(31);
    for (const int k : {2, 5, 24}) {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> scores(static_cast<std::size_t>(k));
            for (double& s : scores) s = rng.uniform(-3.0, 3.0);
            const int label = rng.below_int(k);
            std::vector<double> g(static_cast<std::size_t>(k)), h(static_cast<std::size_t>(k));
            softmax_grad_hess(scores, label, g, h);
            const double eps = 1e-5;
            for (int c = 0; c < k; ++c) {
                auto plus = scores, minus = scores;
                plus[static_cast<std::size_t>(c)] += eps;
                minus[static_cast<std::size_t>(c)] -= eps;
                const double fd_g =
                    (softmax_log_loss(plus, label) - softmax_log_loss(minus, label)) / (2 * eps);
                const double fd_h = (softmax_log_loss(plus, label) -
                                     2 * softmax_log_loss(scores, label) +
                                     softmax_log_loss(minus, label)) /
                                    (eps * eps);
                CHECK(g[static_cast<std::size_t>(c)] ==
                      doctest::Approx(fd_g).epsilon(1e-4));
                CHECK(h[static_cast<std::size_t>(c)] ==
                      doctest::Approx(fd_h).epsilon(1e-3).scale(1.0));
            }
        }
    }
}

TEST_CASE("softmax rejects non-finite scores") {
    CHECK_THROWS_AS(softmax(std::vector<double>{1.0, std::nan("")}), DataError);
}
