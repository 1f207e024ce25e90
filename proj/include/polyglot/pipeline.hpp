#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyglot/corpus.hpp"
#include "polyglot/eval.hpp"
#include "polyglot/features.hpp"
#include "polyglot/models/store.hpp"

namespace polyglot::pipeline {

struct TrainOptions {
    std::string channel = "combined";  // text | code | combined
    std::string model = "gbt";         // nb | rf | gbt
    int min_df = 10;
    bool code_punct_tokens = false;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    int workers = 1;
    PipelineConfig prep;

    double nb_alpha = 1.0;
    models::ForestParams rf;
    models::BoostedParams gbt;
};

// Channel documents: the text channel runs the preprocessing pipeline over
// "title body", the code channel tokenizes the snippet verbatim.
std::vector<TokenSeq> text_docs(const Corpus& corpus, const PipelineConfig& prep);
std::vector<TokenSeq> code_docs(const Corpus& corpus, bool punct_tokens = false);

struct Features {
    std::optional<Vocabulary> text_vocab;
    std::optional<Vocabulary> code_vocab;
    FeatureMatrix matrix;
    std::vector<std::string> class_names;  // observed languages, code order
};

// Fits the channel vocabularies over the whole corpus and vectorizes every
// question. Labels are compacted to the observed language set.
Features build_features(const Corpus& corpus, const TrainOptions& options);

struct TrainEvalResult {
    models::ModelArtifact artifact;
    std::optional<Vocabulary> text_vocab;
    std::optional<Vocabulary> code_vocab;
    eval::ConfusionMatrix confusion;
    eval::MetricsReport report;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

// 80:20 stratified split, fit, evaluate on the held-out part.
TrainEvalResult run_train_eval(const Corpus& corpus, const TrainOptions& options);

struct PredictionInput {
    std::optional<std::string> title;
    std::optional<std::string> body;
    std::optional<std::string> snippet;
};

struct Prediction {
    std::string label;
    std::vector<double> probabilities;
    std::vector<std::string> class_names;
    std::string channel;
};

// Applies the artifact's persisted preprocessing and the given vocabularies.
// Missing fields required by the channel are an error.
Prediction predict(const models::ModelArtifact& artifact, const Vocabulary* text_vocab,
                   const Vocabulary* code_vocab, const PredictionInput& input);

// Throws unless the vocabulary content hash matches what the model was
// trained against.
void verify_vocab(const models::ModelArtifact& artifact, const Vocabulary& vocab);

struct ThresholdOutcome {
    int threshold = 0;
    bool skipped = false;
    std::string skip_reason;
    std::size_t retained = 0;
    eval::MetricsReport report;
};

// Re-runs the code-channel pipeline at each ascending snippet-length floor.
// Thresholds that empty a class (or otherwise cannot train) are reported as
// skipped rather than failing the run.
std::vector<ThresholdOutcome> snippet_length_experiment(const Corpus& corpus,
                                                        const std::vector<int>& thresholds,
                                                        const TrainOptions& options);

// ---- synthetic corpus -------------------------------------------------------

struct GeneratorOptions {
    int languages = 12;       // first N language codes
    int per_language = 200;
    std::uint64_t seed = 42;
    int pool_size = 40;       // keywords per language and channel
    double overlap = 0.2;     // fraction of each pool shared across languages
    double short_snippet_fraction = 0.25;  // snippets of 10..99 uninformative chars
};

// Keyword-pool corpus for tests and demos: each language draws from a pool
// that shares `overlap` of its entries with every other language, and a
// fraction of questions get short snippets built from shared tokens only.
Corpus generate_corpus(const GeneratorOptions& options);

}  // namespace polyglot::pipeline
