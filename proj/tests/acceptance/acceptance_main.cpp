// End-to-end acceptance suite. Each check prints one PASS/FAIL line; the
// process exits nonzero if any check fails. Library-level checks run in
// process; the pipeline gates drive the real CLI binary.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyglot/embed/tsne.hpp"
#include "polyglot/embed/word2vec.hpp"
#include "polyglot/eval.hpp"
#include "polyglot/features.hpp"
#include "polyglot/models/naive_bayes.hpp"
#include "polyglot/models/random_forest.hpp"
#include "polyglot/models/softmax.hpp"
#include "polyglot/models/tree.hpp"
#include "polyglot/pipeline.hpp"
#include "polyglot/util/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polyglot;

namespace {

struct Harness {
    std::string bin;
    std::string data_dir;
    std::string scratch;
    int failures = 0;

    void check(int number, const std::string& name, const std::function<bool(std::string&)>& fn) {
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": " << name << " ("
                  << ms << " ms)";
        if (!detail.empty()) std::cout << " -- " << detail;
        std::cout << "\n" << std::flush;
        if (!ok) failures++;
    }

    int run_cli(const std::string& args) const {
        const std::string cmd = bin + " " + args + " >> " + scratch + "/cli.log 2>&1";
        return std::system(cmd.c_str());
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- criterion 1: tf-idf vs brute force ------------------------------------

bool tfidf_oracle(std::string& detail) {
    Rng rng(1001);
    const std::vector<std::string> lexicon = {"k0", "k1", "k2", "k3", "k4",
                                              "k5", "k6", "k7", "k8", "k9"};
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TokenSeq> docs;
        const int n_docs = 2 + rng.below_int(4);  // <= 5 docs
        for (int d = 0; d < n_docs; ++d) {
            TokenSeq doc;
            const int len = 1 + rng.below_int(10);
            for (int i = 0; i < len; ++i)
                doc.push_back(lexicon[static_cast<std::size_t>(rng.below_int(10))]);
            docs.push_back(std::move(doc));
        }
        const auto vocab = fit_vocabulary(docs, 1, Channel::text);
        for (const auto& doc : docs) {
            const auto vec = vectorize(doc, vocab);
            // independent dense recomputation of the smoothed formula
            std::vector<double> expected(vocab.size(), 0.0);
            for (std::size_t j = 0; j < vocab.size(); ++j) {
                int count = 0;
                for (const auto& tok : doc)
                    if (tok == vocab.terms[j]) count++;
                int df = 0;
                for (const auto& other : docs) {
                    bool found = false;
                    for (const auto& tok : other)
                        if (tok == vocab.terms[j]) found = true;
                    if (found) df++;
                }
                expected[j] = count * (std::log((1.0 + docs.size()) / (1.0 + df)) + 1.0);
            }
            double norm = 0.0;
            for (const double w : expected) norm += w * w;
            if (norm > 0.0)
                for (double& w : expected) w /= std::sqrt(norm);
            for (std::size_t j = 0; j < vocab.size(); ++j)
                worst = std::max(worst,
                                 std::abs(vec.at(static_cast<int>(j)) - expected[j]));
        }
    }
    detail = "max |difference| = " + std::to_string(worst);
    return worst < 1e-9;
}

// ---- criterion 2: naive Bayes closed form ----------------------------------

bool nb_closed_form(std::string& detail) {
    FeatureMatrix m;
    m.dim = 3;
    m.n_classes = 2;
    m.rows = {SparseVector{{{0, 1.0}, {2, 2.0}}, 3}, SparseVector{{{1, 1.0}}, 3}};
    m.labels = {0, 1};
    const auto model = models::nb_fit(m, 1.0);
    const auto p = model.predict_proba(SparseVector{{{2, 1.0}}, 3});
    const double err = std::max(std::abs(p[0] - 2.0 / 3.0), std::abs(p[1] - 1.0 / 3.0));
    detail = "posterior error = " + std::to_string(err);
    return err < 1e-9;
}

// ---- criterion 3: boosting gradients vs finite differences ------------------

// Independent oracle: extended-precision softmax log-loss, so the central
// second difference keeps enough digits for a strict relative comparison.
long double log_loss_ld(const std::vector<long double>& scores, int label) {
    long double mx = scores[0];
    for (const long double s : scores) mx = std::max(mx, s);
    long double z = 0.0L;
    for (const long double s : scores) z += std::exp(s - mx);
    return std::log(z) - (scores[static_cast<std::size_t>(label)] - mx);
}

bool gradient_check(std::string& detail) {
    Rng rng(33);
    double worst_rel = 0.0;
    int done = 0;
    for (const int k : {2, 5, 24}) {
        const int trials = k == 2 ? 34 : 33;
        for (int trial = 0; trial < trials && done < 100; ++trial, ++done) {
            std::vector<double> scores(static_cast<std::size_t>(k));
            for (double& s : scores) s = rng.uniform(-3.0, 3.0);
            const int label = rng.below_int(k);
            std::vector<double> g(static_cast<std::size_t>(k)), h(static_cast<std::size_t>(k));
            models::softmax_grad_hess(scores, label, g, h);

            std::vector<long double> base(scores.begin(), scores.end());
            const long double eps_g = 1e-6L;
            const long double eps_h = 1e-4L;
            for (int c = 0; c < k; ++c) {
                auto plus = base, minus = base;
                plus[static_cast<std::size_t>(c)] += eps_g;
                minus[static_cast<std::size_t>(c)] -= eps_g;
                const long double fd_g =
                    (log_loss_ld(plus, label) - log_loss_ld(minus, label)) / (2 * eps_g);
                plus = base;
                minus = base;
                plus[static_cast<std::size_t>(c)] += eps_h;
                minus[static_cast<std::size_t>(c)] -= eps_h;
                const long double fd_h = (log_loss_ld(plus, label) -
                                          2 * log_loss_ld(base, label) +
                                          log_loss_ld(minus, label)) /
                                         (eps_h * eps_h);
                const double rel_g = static_cast<double>(
                    std::abs(g[static_cast<std::size_t>(c)] - fd_g) /
                    std::max(1e-12L, std::abs(fd_g)));
                const double rel_h = static_cast<double>(
                    std::abs(h[static_cast<std::size_t>(c)] - fd_h) /
                    std::max(1e-12L, std::abs(fd_h)));
                worst_rel = std::max(worst_rel, std::max(rel_g, rel_h));
            }
        }
    }
    detail = "100 score vectors, worst relative error = " + std::to_string(worst_rel);
    return done == 100 && worst_rel < 1e-4;
}

// ---- criterion 4: ensemble identities ---------------------------------------

bool ensemble_identities(std::string& detail) {
    FeatureMatrix m;
    m.dim = 3;
    m.n_classes = 3;
    Rng gen(77);
    for (int i = 0; i < 60; ++i) {
        const int label = gen.below_int(3);
        SparseVector v{{}, 3};
        v.entries.emplace_back(label, 1.0 + gen.unit());
        if (gen.unit() < 0.5) {
            const int extra = (label + 1) % 3;
            v.entries.emplace_back(extra, 0.2 * gen.unit());
            std::sort(v.entries.begin(), v.entries.end());
        }
        m.rows.push_back(std::move(v));
        m.labels.push_back(label);
    }
    models::ForestParams params;
    params.n_estimators = 1;
    params.seed = 4;
    const auto forest = models::rf_fit(m, params);
    Rng rng(88);
    for (int i = 0; i < 1000; ++i) {
        SparseVector v{{}, 3};
        for (int f = 0; f < 3; ++f)
            if (rng.unit() < 0.7) v.entries.emplace_back(f, rng.uniform(0.0, 2.0));
        if (forest.predict(v) != forest.trees[0].predict_class(v)) {
            detail = "single-tree forest diverged from its tree at input " + std::to_string(i);
            return false;
        }
    }
    for (const double g : {-5.0, -1.0, -0.1, 0.0, 0.1, 1.0, 5.0}) {
        for (const double h : {0.01, 0.5, 1.0, 4.0, 16.0}) {
            for (const double alpha : {0.0, 0.2}) {
                double prev = std::abs(models::leaf_weight(g, h, 0.0, alpha));
                for (const double lambda : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 32.0}) {
                    const double cur = std::abs(models::leaf_weight(g, h, lambda, alpha));
                    if (cur > prev + 1e-15) {
                        detail = "leaf weight grew with lambda at g=" + std::to_string(g);
                        return false;
                    }
                    prev = cur;
                }
            }
        }
    }
    detail = "1000 prediction identities and 490 lambda steps held";
    return true;
}

// ---- criterion 5: stratification --------------------------------------------

bool stratification(std::string& detail) {
    Rng rng(2025);
    for (int trial = 0; trial < 50; ++trial) {
        const int classes = 2 + rng.below_int(6);
        const int k = 2 + rng.below_int(7);
        std::vector<int> sizes;
        std::vector<int> labels;
        for (int c = 0; c < classes; ++c) {
            const int n = k + rng.below_int(60);
            sizes.push_back(n);
            for (int i = 0; i < n; ++i) labels.push_back(c);
        }
        const auto folds = eval::stratified_kfold(labels, classes, k, rng.next_u64());
        for (const auto& fold : folds) {
            std::vector<int> per_class(static_cast<std::size_t>(classes), 0);
            for (const auto i : fold) per_class[static_cast<std::size_t>(labels[i])]++;
            for (int c = 0; c < classes; ++c) {
                const double share = static_cast<double>(sizes[static_cast<std::size_t>(c)]) /
                                     static_cast<double>(k);
                if (std::abs(per_class[static_cast<std::size_t>(c)] - share) > 1.0) {
                    detail = "fold share off by more than one sample";
                    return false;
                }
            }
        }
        // holdout rounding, checked against integer arithmetic: train_c =
        // floor(0.8 n + 0.5) = (8n + 5) / 10
        eval::SplitSpec spec;
        spec.seed = rng.next_u64();
        const auto split = eval::stratified_holdout(labels, classes, spec);
        std::vector<int> train_counts(static_cast<std::size_t>(classes), 0);
        for (const auto i : split.train) train_counts[static_cast<std::size_t>(labels[i])]++;
        for (int c = 0; c < classes; ++c) {
            const int expected = (8 * sizes[static_cast<std::size_t>(c)] + 5) / 10;
            if (train_counts[static_cast<std::size_t>(c)] != expected) {
                detail = "train count " + std::to_string(train_counts[static_cast<std::size_t>(c)]) +
                         " for class size " + std::to_string(sizes[static_cast<std::size_t>(c)]) +
                         ", expected " + std::to_string(expected);
                return false;
            }
        }
    }
    detail = "50 random class-size vectors held";
    return true;
}

// ---- criterion 6: metric cross-check ----------------------------------------

bool metric_crosscheck(std::string& detail) {
    const double f1 = 2.0 * 0.98 * 0.96 / (0.98 + 0.96);
    if (std::round(f1 * 100.0) / 100.0 != 0.97) {
        detail = "F1(0.98, 0.96) did not round to 0.97";
        return false;
    }
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + rng.below_int(6);
        const int n = 20 + rng.below_int(200);
        std::vector<int> truth, pred;
        long long correct = 0;
        for (int i = 0; i < n; ++i) {
            truth.push_back(rng.below_int(k));
            pred.push_back(rng.below_int(k));
            if (truth.back() == pred.back()) correct++;
        }
        const auto cm = eval::confusion_matrix(truth, pred, k);
        const auto report = eval::metrics_from_confusion(cm);
        const double direct = static_cast<double>(correct) / static_cast<double>(n);
        if (std::abs(report.accuracy - direct) > 1e-12) {
            detail = "accuracy paths disagree by " + std::to_string(report.accuracy - direct);
            return false;
        }
    }
    detail = "Swift-row rounding and 100 random matrices agree";
    return true;
}

// ---- criteria 7, 8, 10: CLI pipeline gates -----------------------------------

bool synthetic_gate(Harness& h, std::string& detail) {
    const std::string corpus = h.scratch + "/corpus.jsonl";
    const std::string stopwords = h.data_dir + "/stopwords.txt";
    if (h.run_cli("generate-corpus --out " + corpus +
                  " --languages 12 --per-language 200 --seed 42") != 0) {
        detail = "generate-corpus failed";
        return false;
    }
    const std::string common = " --corpus " + corpus + " --stopwords " + stopwords +
                               " --seed 7 --model gbt --gbt-rounds 30";
    struct RunSpec {
        std::string channel;
        std::string dir;
    };
    std::vector<RunSpec> runs = {{"combined", h.scratch + "/gate_combined"},
                                 {"text", h.scratch + "/gate_text"},
                                 {"code", h.scratch + "/gate_code"}};
    std::map<std::string, double> accuracy;
    std::map<std::string, json> reports;
    for (const auto& run : runs) {
        if (h.run_cli("train" + common + " --channel " + run.channel + " --out-dir " + run.dir) != 0) {
            detail = "train failed for channel " + run.channel;
            return false;
        }
        const json report = json::parse(read_file(run.dir + "/report.json"));
        accuracy[run.channel] = report.at("accuracy").get<double>();
        reports[run.channel] = report;
    }
    // majority baseline from the test split of the combined run
    double majority = 0.0;
    {
        const json& report = reports["combined"];
        long long total = 0, biggest = 0;
        for (const auto& row : report.at("confusion")) {
            long long row_sum = 0;
            for (const auto& v : row) row_sum += v.get<long long>();
            total += row_sum;
            biggest = std::max(biggest, row_sum);
        }
        majority = static_cast<double>(biggest) / static_cast<double>(total);
    }
    std::ostringstream os;
    os << "combined=" << accuracy["combined"] << " text=" << accuracy["text"]
       << " code=" << accuracy["code"] << " baseline=" << majority;
    detail = os.str();
    return accuracy["combined"] >= 0.90 && accuracy["text"] >= majority + 0.20 &&
           accuracy["code"] >= majority + 0.20;
}

bool snippet_trend(Harness& h, std::string& detail) {
    const std::string corpus = h.scratch + "/corpus.jsonl";
    const std::string study = h.scratch + "/study.json";
    if (h.run_cli("snippet-length-study --corpus " + corpus + " --stopwords " + h.data_dir +
                  "/stopwords.txt --model gbt --gbt-rounds 30 --seed 7 --thresholds 10 100 "
                  "--out " + study) != 0) {
        detail = "snippet-length-study failed";
        return false;
    }
    const json doc = json::parse(read_file(study));
    double at10 = -1.0, at100 = -1.0;
    for (const auto& row : doc.at("thresholds")) {
        if (row.at("skipped").get<bool>()) continue;
        if (row.at("threshold") == 10) at10 = row.at("accuracy").get<double>();
        if (row.at("threshold") == 100) at100 = row.at("accuracy").get<double>();
    }
    std::ostringstream os;
    os << "accuracy@10=" << at10 << " accuracy@100=" << at100;
    detail = os.str();
    return at10 >= 0.0 && at100 >= 0.0 && at100 >= at10 - 0.02;
}

// ---- criterion 9: embedding sanity -------------------------------------------

bool embedding_sanity(std::string& detail) {
    Rng rng(515);
    std::vector<TokenSeq> docs;
    for (int block = 0; block < 2; ++block) {
        const std::string prefix = block == 0 ? "a" : "b";
        for (int s = 0; s < 120; ++s) {
            TokenSeq doc;
            const int len = 6 + rng.below_int(5);
            for (int i = 0; i < len; ++i) doc.push_back(prefix + std::to_string(rng.below_int(6)));
            docs.push_back(std::move(doc));
        }
    }
    embed::SkipGramParams params;
    params.dim = 32;
    params.window = 3;
    params.epochs = 10;
    params.seed = 99;
    const auto model = embed::train_skipgram(docs, params);

    double intra = 0.0, inter = 0.0;
    int intra_n = 0, inter_n = 0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        for (std::size_t j = i + 1; j < model.size(); ++j) {
            const double sim = embed::cosine(model.input_vectors[i], model.input_vectors[j]);
            if (model.vocab[i][0] == model.vocab[j][0]) {
                intra += sim;
                intra_n++;
            } else {
                inter += sim;
                inter_n++;
            }
        }
    }
    intra /= intra_n;
    inter /= inter_n;

    // t-SNE: KL descent on a real run plus the finite-difference gradient check
    std::vector<std::vector<double>> points;
    for (std::size_t i = 0; i < model.size(); ++i) points.push_back(model.input_vectors[i]);
    Rng blob_rng(8);
    while (points.size() < 40) {
        std::vector<double> extra(32);
        for (double& x : extra) x = blob_rng.gaussian();
        points.push_back(std::move(extra));
    }
    embed::TsneParams tsne;
    tsne.perplexity = 8.0;
    tsne.iterations = 400;
    tsne.learning_rate = 100.0;
    tsne.seed = 5;
    const auto proj = embed::tsne_project(points, tsne);
    const bool kl_ok = proj.kl_trace.back() < proj.kl_trace.front();

    Rng fd_rng(404);
    std::vector<std::vector<double>> small;
    for (int i = 0; i < 9; ++i)
        small.push_back({fd_rng.uniform(-1, 1), fd_rng.uniform(-1, 1), fd_rng.uniform(-1, 1)});
    const auto p = embed::tsne_affinities(small, 2.0);
    std::vector<std::array<double, 2>> layout;
    for (int i = 0; i < 9; ++i) layout.push_back({fd_rng.uniform(-0.5, 0.5), fd_rng.uniform(-0.5, 0.5)});
    const auto grad = embed::tsne_gradient(p, layout);
    double worst_rel = 0.0;
    const double eps = 1e-6;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        for (std::size_t d = 0; d < 2; ++d) {
            auto plus = layout, minus = layout;
            plus[i][d] += eps;
            minus[i][d] -= eps;
            const double fd = (embed::tsne_kl(p, plus) - embed::tsne_kl(p, minus)) / (2 * eps);
            worst_rel = std::max(worst_rel,
                                 std::abs(grad[i][d] - fd) / std::max(1e-8, std::abs(fd)));
        }
    }
    std::ostringstream os;
    os << "intra=" << intra << " inter=" << inter << " kl " << proj.kl_trace.front() << "->"
       << proj.kl_trace.back() << " grad_rel=" << worst_rel;
    detail = os.str();
    return (intra - inter >= 0.1) && kl_ok && worst_rel < 1e-4;
}

bool determinism(Harness& h, std::string& detail) {
    const std::string corpus = h.scratch + "/corpus.jsonl";
    const std::string stopwords = h.data_dir + "/stopwords.txt";
    const std::string env = "POLYGLOT_ID_WORKERS=1 ";

    auto same = [&](const std::string& a, const std::string& b) {
        return read_file(a) == read_file(b) && !read_file(a).empty();
    };

    for (const char* tag : {"d1", "d2"}) {
        if (h.run_cli("train --corpus " + corpus + " --stopwords " + stopwords +
                      " --channel code --model gbt --gbt-rounds 8 --seed 5 --out-dir " +
                      h.scratch + "/train_" + tag) != 0) {
            detail = "train rerun failed";
            return false;
        }
        if (h.run_cli("tune --corpus " + corpus + " --stopwords " + stopwords +
                      " --channel text --model nb --budget 4 --folds 3 --seed 5 --out " +
                      h.scratch + "/tune_" + tag + ".json") != 0) {
            detail = "tune rerun failed";
            return false;
        }
        if (std::system((env + h.bin + " embed --corpus " + corpus +
                         " --language c --channel code --dim 24 --epochs 3 --seed 5 --out " +
                         h.scratch + "/embed_" + tag + ".json >> " + h.scratch + "/cli.log 2>&1")
                            .c_str()) != 0) {
            detail = "embed rerun failed";
            return false;
        }
    }
    if (!same(h.scratch + "/train_d1/model.json", h.scratch + "/train_d2/model.json")) {
        detail = "model artifacts differ";
        return false;
    }
    if (!same(h.scratch + "/train_d1/report.json", h.scratch + "/train_d2/report.json")) {
        detail = "reports differ";
        return false;
    }
    if (!same(h.scratch + "/train_d1/vocab_code.json", h.scratch + "/train_d2/vocab_code.json")) {
        detail = "vocabularies differ";
        return false;
    }
    if (!same(h.scratch + "/tune_d1.json", h.scratch + "/tune_d2.json")) {
        detail = "tune artifacts differ";
        return false;
    }
    if (!same(h.scratch + "/embed_d1.json", h.scratch + "/embed_d2.json")) {
        detail = "embeddings differ";
        return false;
    }
    detail = "train, tune and embed artifacts are byte-identical";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    Harness h;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--bin") h.bin = argv[i + 1];
        if (flag == "--data") h.data_dir = argv[i + 1];
        if (flag == "--scratch") h.scratch = argv[i + 1];
    }
    if (h.bin.empty() || h.data_dir.empty() || h.scratch.empty()) {
        std::cerr << "usage: acceptance_tests --bin CLI --data DIR --scratch DIR\n";
        return 2;
    }
    fs::remove_all(h.scratch);
    fs::create_directories(h.scratch);

    h.check(1, "tf-idf matches the brute-force oracle within 1e-9", tfidf_oracle);
    h.check(2, "naive Bayes posterior of 'foo' is (2/3, 1/3)", nb_closed_form);
    h.check(3, "softmax gradients/hessians match finite differences", gradient_check);
    h.check(4, "single-tree forest identity and lambda monotonicity", ensemble_identities);
    h.check(5, "fold and holdout stratification follow the documented rules", stratification);
    h.check(6, "metric rounding and two accuracy paths agree", metric_crosscheck);
    h.check(7, "synthetic end-to-end gate (combined >= 0.90, channels beat baseline + 0.20)",
            [&](std::string& d) { return synthetic_gate(h, d); });
    h.check(8, "code-channel accuracy does not drop at snippet floor 100",
            [&](std::string& d) { return snippet_trend(h, d); });
    h.check(9, "embedding block separation and t-SNE descent/gradient", embedding_sanity);
    h.check(10, "train/tune/embed artifacts are byte-identical across reruns",
            [&](std::string& d) { return determinism(h, d); });

    if (h.failures > 0) {
        std::cout << h.failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
