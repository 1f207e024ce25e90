#include "polyglot/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::pipeline {

std::vector<TokenSeq> text_docs(const Corpus& corpus, const PipelineConfig& prep) {
    std::vector<TokenSeq> docs;
    docs.reserve(corpus.questions.size());
    for (const auto& q : corpus.questions)
        docs.push_back(preprocess_text(q.title + " " + q.body_text, prep));
    return docs;
}

std::vector<TokenSeq> code_docs(const Corpus& corpus, bool punct_tokens) {
    std::vector<TokenSeq> docs;
    docs.reserve(corpus.questions.size());
    for (const auto& q : corpus.questions)
        docs.push_back(tokenize_code(q.snippet, punct_tokens));
    return docs;
}

Features build_features(const Corpus& corpus, const TrainOptions& options) {
    if (corpus.questions.empty()) throw DataError("empty corpus");
    if (options.channel != "text" && options.channel != "code" && options.channel != "combined")
        throw ConfigError("unknown channel: " + options.channel);

    Features out;
    std::set<LanguageId> observed;
    for (const auto& q : corpus.questions) observed.insert(q.label);
    std::map<LanguageId, int> compact;
    for (const LanguageId lang : observed) {
        compact[lang] = static_cast<int>(out.class_names.size());
        out.class_names.emplace_back(language_name(lang));
    }

    const bool want_text = options.channel != "code";
    const bool want_code = options.channel != "text";
    std::vector<SparseVector> text_rows, code_rows;
    if (want_text) {
        const auto docs = text_docs(corpus, options.prep);
        out.text_vocab = fit_vocabulary(docs, options.min_df, Channel::text);
        text_rows.reserve(docs.size());
        for (const auto& d : docs) text_rows.push_back(vectorize(d, *out.text_vocab));
    }
    if (want_code) {
        const auto docs = code_docs(corpus, options.code_punct_tokens);
        out.code_vocab = fit_vocabulary(docs, options.min_df, Channel::code);
        code_rows.reserve(docs.size());
        for (const auto& d : docs) code_rows.push_back(vectorize(d, *out.code_vocab));
    }

    out.matrix.n_classes = static_cast<int>(out.class_names.size());
    out.matrix.rows.reserve(corpus.questions.size());
    out.matrix.labels.reserve(corpus.questions.size());
    for (std::size_t i = 0; i < corpus.questions.size(); ++i) {
        if (options.channel == "text") {
            out.matrix.rows.push_back(std::move(text_rows[i]));
        } else if (options.channel == "code") {
            out.matrix.rows.push_back(std::move(code_rows[i]));
        } else {
            out.matrix.rows.push_back(combine_channels(text_rows[i], code_rows[i]));
        }
        out.matrix.labels.push_back(compact.at(corpus.questions[i].label));
    }
    out.matrix.dim = out.matrix.rows.empty() ? 0 : out.matrix.rows.front().dim;
    if (options.channel == "combined")
        out.matrix.channel_dims = {static_cast<int>(out.text_vocab->size()),
                                   static_cast<int>(out.code_vocab->size())};
    return out;
}

TrainEvalResult run_train_eval(const Corpus& corpus, const TrainOptions& options) {
    auto features = build_features(corpus, options);
    const auto& matrix = features.matrix;

    eval::SplitSpec spec;
    spec.train_fraction = options.train_fraction;
    spec.seed = options.seed;
    const auto split =
        eval::stratified_holdout(matrix.labels, matrix.n_classes, spec, features.class_names);
    const auto train = eval::submatrix(matrix, split.train);
    const auto test = eval::submatrix(matrix, split.test);

    TrainEvalResult result;
    result.train_size = split.train.size();
    result.test_size = split.test.size();
    result.artifact.channel = options.channel;
    result.artifact.class_names = features.class_names;
    result.artifact.preprocessing = options.prep;
    result.artifact.min_df = options.min_df;
    result.artifact.code_punct_tokens = options.code_punct_tokens;
    if (features.text_vocab)
        result.artifact.vocab_hashes["text"] = features.text_vocab->content_hash();
    if (features.code_vocab)
        result.artifact.vocab_hashes["code"] = features.code_vocab->content_hash();

    if (options.model == "nb") {
        result.artifact.model = models::nb_fit(train, options.nb_alpha);
    } else if (options.model == "rf") {
        auto params = options.rf;
        params.seed = options.seed;
        result.artifact.model = models::rf_fit(train, params, options.workers);
    } else if (options.model == "gbt") {
        auto params = options.gbt;
        params.seed = options.seed;
        result.artifact.model = models::gbt_fit(train, params, options.workers);
    } else {
        throw ConfigError("unknown model: " + options.model);
    }

    std::vector<int> predicted;
    predicted.reserve(test.rows.size());
    for (const auto& row : test.rows) predicted.push_back(result.artifact.predict(row));
    result.confusion = eval::confusion_matrix(test.labels, predicted, matrix.n_classes);
    result.report = eval::metrics_from_confusion(result.confusion);
    result.text_vocab = std::move(features.text_vocab);
    result.code_vocab = std::move(features.code_vocab);
    return result;
}

void verify_vocab(const models::ModelArtifact& artifact, const Vocabulary& vocab) {
    const std::string channel(channel_name(vocab.channel));
    const auto it = artifact.vocab_hashes.find(channel);
    if (it == artifact.vocab_hashes.end())
        throw DataError("model has no " + channel + " vocabulary");
    const auto hash = vocab.content_hash();
    if (hash != it->second)
        throw DataError("vocabulary hash mismatch for channel " + channel + ": model expects " +
                        it->second + ", file has " + hash);
}

Prediction predict(const models::ModelArtifact& artifact, const Vocabulary* text_vocab,
                   const Vocabulary* code_vocab, const PredictionInput& input) {
    const bool has_text = (input.title && !input.title->empty()) ||
                          (input.body && !input.body->empty());
    const bool has_code = input.snippet && !input.snippet->empty();
    const bool want_text = artifact.channel != "code";
    const bool want_code = artifact.channel != "text";
    if (want_text && !has_text)
        throw DataError("channel " + artifact.channel + " requires title/body");
    if (want_code && !has_code)
        throw DataError("channel " + artifact.channel + " requires snippet");
    if (want_text && text_vocab == nullptr)
        throw ConfigError("channel " + artifact.channel + " needs the text vocabulary");
    if (want_code && code_vocab == nullptr)
        throw ConfigError("channel " + artifact.channel + " needs the code vocabulary");

    SparseVector vec;
    if (want_text) {
        std::string text;
        if (input.title) text += *input.title;
        if (input.body) {
            if (!text.empty()) text += ' ';
            text += *input.body;
        }
        vec = vectorize(preprocess_text(text, artifact.preprocessing), *text_vocab);
    }
    if (want_code) {
        const auto code_vec = vectorize(
            tokenize_code(*input.snippet, artifact.code_punct_tokens), *code_vocab);
        vec = want_text ? combine_channels(vec, code_vec) : code_vec;
    }

    Prediction pred;
    pred.channel = artifact.channel;
    pred.class_names = artifact.class_names;
    pred.probabilities = artifact.predict_proba(vec);
    int best = 0;
    for (std::size_t c = 1; c < pred.probabilities.size(); ++c)
        if (pred.probabilities[c] > pred.probabilities[static_cast<std::size_t>(best)])
            best = static_cast<int>(c);
    pred.label = artifact.class_names[static_cast<std::size_t>(best)];
    return pred;
}

std::vector<ThresholdOutcome> snippet_length_experiment(const Corpus& corpus,
                                                        const std::vector<int>& thresholds,
                                                        const TrainOptions& options) {
    if (thresholds.empty()) throw ConfigError("snippet_length_experiment: no thresholds");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 1) throw ConfigError("thresholds must be >= 1");
        if (i > 0 && thresholds[i] <= thresholds[i - 1])
            throw ConfigError("thresholds must be strictly ascending");
    }
    std::set<LanguageId> all_classes;
    for (const auto& q : corpus.questions) all_classes.insert(q.label);

    auto code_options = options;
    code_options.channel = "code";

    std::vector<ThresholdOutcome> outcomes;
    for (const int threshold : thresholds) {
        ThresholdOutcome outcome;
        outcome.threshold = threshold;
        Corpus filtered;
        for (const auto& q : corpus.questions)
            if (static_cast<int>(q.snippet.size()) >= threshold) filtered.questions.push_back(q);
        filtered.recount();
        outcome.retained = filtered.questions.size();

        std::string empty_class;
        for (const LanguageId lang : all_classes) {
            if (filtered.counts[lang] == 0) {
                empty_class = std::string(language_name(lang));
                break;
            }
        }
        if (!empty_class.empty()) {
            outcome.skipped = true;
            outcome.skip_reason = "no snippets of length >= " + std::to_string(threshold) +
                                  " for language '" + empty_class + "'";
        } else {
            try {
                outcome.report = run_train_eval(filtered, code_options).report;
            } catch (const std::exception& e) {
                outcome.skipped = true;
                outcome.skip_reason = e.what();
            }
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

namespace {

std::string make_token(const std::string& prefix, int a, const std::string& mid, int b) {
    return prefix + std::to_string(a) + mid + std::to_string(b);
}

}  // namespace

Corpus generate_corpus(const GeneratorOptions& options) {
    if (options.languages < 2 || options.languages > kLanguageCount)
        throw ConfigError("generate_corpus: languages must be in [2, 24]");
    if (options.per_language < 1) throw ConfigError("generate_corpus: per_language must be >= 1");
    if (options.overlap < 0.0 || options.overlap >= 1.0)
        throw ConfigError("generate_corpus: overlap must be in [0, 1)");

    const int shared_n = static_cast<int>(options.overlap * options.pool_size + 0.5);
    const int unique_n = options.pool_size - shared_n;

    std::vector<std::string> shared_text, shared_code;
    for (int j = 0; j < shared_n; ++j) {
        shared_text.push_back("wsq" + std::to_string(j));
        shared_code.push_back("ksf" + std::to_string(j));
    }
    std::vector<std::vector<std::string>> text_pool(static_cast<std::size_t>(options.languages));
    std::vector<std::vector<std::string>> code_pool(static_cast<std::size_t>(options.languages));
    for (int lang = 0; lang < options.languages; ++lang) {
        auto& tp = text_pool[static_cast<std::size_t>(lang)];
        auto& cp = code_pool[static_cast<std::size_t>(lang)];
        for (int j = 0; j < unique_n; ++j) {
            tp.push_back(make_token("w", lang, "q", j));
            cp.push_back(make_token("k", lang, "f", j));
        }
        tp.insert(tp.end(), shared_text.begin(), shared_text.end());
        cp.insert(cp.end(), shared_code.begin(), shared_code.end());
    }

    const std::vector<std::string> filler = {"the", "a",    "how",  "error", "when",
                                             "code", "using", "with", "problem", "work"};

    Corpus corpus;
    std::int64_t next_id = 1;
    for (int lang = 0; lang < options.languages; ++lang) {
        const int short_count =
            static_cast<int>(options.short_snippet_fraction * options.per_language + 0.5);
        for (int qn = 0; qn < options.per_language; ++qn) {
            Rng rng(mix_seed(options.seed, (static_cast<std::uint64_t>(lang) << 32) |
                                               static_cast<std::uint64_t>(qn)));
            const auto& tp = text_pool[static_cast<std::size_t>(lang)];
            const auto& cp = code_pool[static_cast<std::size_t>(lang)];
            Question q;
            q.id = next_id++;
            q.label = static_cast<LanguageId>(lang);

            const int title_len = 3 + rng.below_int(4);
            for (int i = 0; i < title_len; ++i) {
                if (!q.title.empty()) q.title += ' ';
                q.title += tp[static_cast<std::size_t>(rng.below_int(static_cast<int>(tp.size())))];
            }
            const int body_len = 15 + rng.below_int(16);
            for (int i = 0; i < body_len; ++i) {
                if (!q.body_text.empty()) q.body_text += ' ';
                if (rng.unit() < 0.25)
                    q.body_text +=
                        filler[static_cast<std::size_t>(rng.below_int(static_cast<int>(filler.size())))];
                else
                    q.body_text +=
                        tp[static_cast<std::size_t>(rng.below_int(static_cast<int>(tp.size())))];
            }

            if (qn < short_count) {
                // deliberately uninformative short snippet from shared tokens
                const int want = 10 + rng.below_int(90);
                while (static_cast<int>(q.snippet.size()) < want) {
                    if (!q.snippet.empty()) q.snippet += "; ";
                    q.snippet += shared_code.empty()
                                     ? "xx"
                                     : shared_code[static_cast<std::size_t>(
                                           rng.below_int(static_cast<int>(shared_code.size())))];
                }
                q.snippet.resize(static_cast<std::size_t>(want));
            } else {
                const int lines = 6 + rng.below_int(5);  // keeps normal snippets >= 100 chars
                for (int line = 0; line < lines; ++line) {
                    const auto& t1 =
                        cp[static_cast<std::size_t>(rng.below_int(static_cast<int>(cp.size())))];
                    const auto& t2 =
                        cp[static_cast<std::size_t>(rng.below_int(static_cast<int>(cp.size())))];
                    const auto& t3 =
                        cp[static_cast<std::size_t>(rng.below_int(static_cast<int>(cp.size())))];
                    q.snippet += t1 + " = " + t2 + "(" + t3 + ");\n";
                }
            }
            corpus.questions.push_back(std::move(q));
        }
    }
    corpus.recount();
    return corpus;
}

}  // namespace polyglot::pipeline
