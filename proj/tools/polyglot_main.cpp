#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyglot/corpus.hpp"
#include "polyglot/embed/tsne.hpp"
#include "polyglot/embed/word2vec.hpp"
#include "polyglot/eval.hpp"
#include "polyglot/pipeline.hpp"
#include "polyglot/util/errors.hpp"
#include "polyglot/util/hash.hpp"
#include "polyglot/util/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polyglot;

namespace {

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64_hex(buf.str());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << content;
}

void write_json(const std::string& path, const json& doc, int indent = 1) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << doc.dump(indent) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return doc;
}

// Options shared by the training-flavored subcommands, mirrored one-to-one
// onto CLI flags. A config file (CLI11 TOML/INI) fills anything the command
// line leaves unset; built-in defaults come last.
struct RunFlags {
    std::string corpus_path;
    std::string out_dir = "out";
    std::string channel = "combined";
    std::string model = "gbt";
    int min_df = 10;
    bool code_punct_tokens = false;
    bool no_stem = false;
    bool no_stopwords = false;
    bool no_entities = false;
    int min_token_len = 2;
    std::string stopwords_path = "data/stopwords.txt";
    std::uint64_t seed = 0;
    double train_fraction = 0.8;

    double nb_alpha = 1.0;
    int rf_estimators = 100;
    int rf_max_depth = 0;
    int rf_features_per_split = 0;
    int rf_min_samples_leaf = 1;
    int gbt_rounds = 50;
    int gbt_max_depth = 6;
    double gbt_eta = 0.3;
    double gbt_lambda = 1.0;
    double gbt_alpha = 0.0;
    double gbt_gamma = 0.0;
    double gbt_min_child_weight = 1.0;

    void register_common(CLI::App* cmd, bool with_model = true) {
        cmd->add_option("--corpus", corpus_path, "Corpus JSON-lines file")->required();
        if (with_model) {
            cmd->add_option("--channel", channel, "Feature channel")
                ->check(CLI::IsMember({"text", "code", "combined"}));
            cmd->add_option("--model", model, "Classifier")
                ->check(CLI::IsMember({"nb", "rf", "gbt"}));
        }
        cmd->add_option("--min-df", min_df, "Minimum document frequency");
        cmd->add_flag("--code-punct-tokens", code_punct_tokens,
                      "Also emit punctuation runs as code tokens");
        cmd->add_flag("--no-stem", no_stem, "Disable stemming");
        cmd->add_flag("--no-stopwords", no_stopwords, "Disable stop-word removal");
        cmd->add_flag("--no-entities", no_entities, "Disable identifier retention");
        cmd->add_option("--min-token-len", min_token_len, "Minimum token length");
        cmd->add_option("--stopwords", stopwords_path, "Stop-word list file");
        cmd->add_option("--seed", seed, "Random seed");
        cmd->add_option("--train-fraction", train_fraction, "Training share of the split");
        cmd->add_option("--nb-alpha", nb_alpha, "Naive Bayes smoothing");
        cmd->add_option("--rf-estimators", rf_estimators, "Forest size");
        cmd->add_option("--rf-max-depth", rf_max_depth, "Forest tree depth cap (0 = none)");
        cmd->add_option("--rf-features-per-split", rf_features_per_split,
                        "Candidate features per node (0 = ceil(sqrt(V)))");
        cmd->add_option("--rf-min-samples-leaf", rf_min_samples_leaf, "Minimum leaf size");
        cmd->add_option("--gbt-rounds", gbt_rounds, "Boosting rounds");
        cmd->add_option("--gbt-max-depth", gbt_max_depth, "Boosted tree depth cap");
        cmd->add_option("--gbt-eta", gbt_eta, "Boosting learning rate");
        cmd->add_option("--gbt-lambda", gbt_lambda, "L2 regularization");
        cmd->add_option("--gbt-alpha", gbt_alpha, "L1 regularization");
        cmd->add_option("--gbt-gamma", gbt_gamma, "Minimum split gain");
        cmd->add_option("--gbt-min-child-weight", gbt_min_child_weight,
                        "Minimum child hessian mass");
    }

    pipeline::TrainOptions to_options() const {
        pipeline::TrainOptions o;
        o.channel = channel;
        o.model = model;
        o.min_df = min_df;
        o.code_punct_tokens = code_punct_tokens;
        o.train_fraction = train_fraction;
        o.seed = seed;
        o.workers = worker_count();
        o.prep.stem = !no_stem;
        o.prep.remove_stopwords = !no_stopwords;
        o.prep.retain_entities = !no_entities;
        o.prep.min_token_len = min_token_len;
        if (o.prep.remove_stopwords) o.prep.stopword_list = load_stopwords(stopwords_path);
        o.nb_alpha = nb_alpha;
        o.rf.n_estimators = rf_estimators;
        o.rf.max_depth = rf_max_depth;
        o.rf.features_per_split = rf_features_per_split;
        o.rf.min_samples_leaf = rf_min_samples_leaf;
        o.gbt.n_rounds = gbt_rounds;
        o.gbt.max_depth = gbt_max_depth;
        o.gbt.eta = gbt_eta;
        o.gbt.lambda_l2 = gbt_lambda;
        o.gbt.alpha_l1 = gbt_alpha;
        o.gbt.min_split_gain = gbt_gamma;
        o.gbt.min_child_weight = gbt_min_child_weight;
        return o;
    }

    json effective_config() const {
        return {{"corpus", corpus_path},
                {"channel", channel},
                {"model", model},
                {"features.min_df", min_df},
                {"features.code_punct_tokens", code_punct_tokens},
                {"textprep.stem", !no_stem},
                {"textprep.remove_stopwords", !no_stopwords},
                {"textprep.retain_entities", !no_entities},
                {"textprep.min_token_len", min_token_len},
                {"textprep.stopwords", stopwords_path},
                {"eval.train_fraction", train_fraction},
                {"models.nb.alpha", nb_alpha},
                {"models.rf.n_estimators", rf_estimators},
                {"models.rf.max_depth", rf_max_depth},
                {"models.rf.features_per_split", rf_features_per_split},
                {"models.rf.min_samples_leaf", rf_min_samples_leaf},
                {"models.gbt.n_rounds", gbt_rounds},
                {"models.gbt.max_depth", gbt_max_depth},
                {"models.gbt.eta", gbt_eta},
                {"models.gbt.lambda", gbt_lambda},
                {"models.gbt.alpha", gbt_alpha},
                {"models.gbt.gamma", gbt_gamma},
                {"models.gbt.min_child_weight", gbt_min_child_weight},
                {"seed", seed}};
    }
};

json report_to_json(const eval::MetricsReport& report, const eval::ConfusionMatrix& cm,
                    const std::vector<std::string>& class_names) {
    json per_class = json::array();
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const auto& m = report.per_class[c];
        per_class.push_back({{"language", class_names[c]},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support},
                             {"zero_division", m.zero_division}});
    }
    return {{"accuracy", report.accuracy},
            {"macro_precision", report.macro_precision},
            {"macro_recall", report.macro_recall},
            {"macro_f1", report.macro_f1},
            {"per_class", std::move(per_class)},
            {"class_names", class_names},
            {"confusion", cm.counts}};
}

void write_report_files(const std::string& out_dir, const json& report_doc,
                        const eval::MetricsReport& report, const eval::ConfusionMatrix& cm,
                        const std::vector<std::string>& class_names) {
    write_json(out_dir + "/report.json", report_doc);
    write_text(out_dir + "/report.txt", eval::render_metrics_table(report, class_names));
    write_text(out_dir + "/confusion.csv", eval::render_confusion_csv(cm, class_names));
}

int cmd_generate_corpus(const std::string& out_path, const pipeline::GeneratorOptions& gen) {
    const Corpus corpus = pipeline::generate_corpus(gen);
    save_corpus(corpus, out_path);
    std::cout << "wrote " << corpus.questions.size() << " questions ("
              << gen.languages << " languages) to " << out_path << "\n";
    return 0;
}

int cmd_ingest(const std::string& dump_path, const std::string& out_path,
               const std::string& tag_map_path, int min_snippet_chars, bool abort_on_error) {
    const TagMap tag_map = tag_map_path.empty() ? default_tag_map() : load_tag_map(tag_map_path);
    std::ifstream in(dump_path, std::ios::binary);
    if (!in) throw IoError("cannot open dump: " + dump_path);
    PostStream stream(in);
    Corpus corpus;
    std::set<std::int64_t> seen_ids;
    std::size_t rows = 0, errors = 0;
    while (auto item = stream.next()) {
        if (auto* err = std::get_if<PostStream::RowError>(&*item)) {
            errors++;
            std::cerr << "row error at offset " << err->offset << ": " << err->message << "\n";
            if (abort_on_error) throw DataError("aborting on malformed row: " + err->message);
            continue;
        }
        rows++;
        const auto& post = std::get<RawPost>(*item);
        if (!seen_ids.insert(post.id).second) {
            errors++;
            std::cerr << "duplicate post id " << post.id << ", skipping\n";
            continue;
        }
        if (auto q = extract_question(post, tag_map, min_snippet_chars))
            corpus.questions.push_back(std::move(*q));
    }
    corpus.recount();
    save_corpus(corpus, out_path);
    std::cout << "parsed " << rows << " question rows (" << errors << " skipped), kept "
              << corpus.questions.size() << " -> " << out_path << "\n";
    return 0;
}

int cmd_sample(const std::string& in_path, const std::string& out_path, int per_language,
               std::uint64_t seed) {
    const Corpus corpus = load_corpus(in_path);
    const Corpus sampled = sample_balanced(corpus, per_language, seed);
    for (const auto& [lang, count] : sampled.counts)
        if (count == 0 && corpus.counts.count(lang) == 0)
            std::cerr << "warning: no samples for language '" << language_name(lang) << "'\n";
    save_corpus(sampled, out_path);
    std::cout << "sampled " << sampled.questions.size() << " of " << corpus.questions.size()
              << " questions -> " << out_path << "\n";
    return 0;
}

int cmd_train(const RunFlags& flags) {
    const Corpus corpus = load_corpus(flags.corpus_path);
    const auto options = flags.to_options();
    auto result = pipeline::run_train_eval(corpus, options);

    fs::create_directories(flags.out_dir);
    json inputs = {{"corpus", hash_file(flags.corpus_path)}};
    if (options.prep.remove_stopwords) inputs["stopwords"] = hash_file(flags.stopwords_path);

    const json envelope = {{"format_version", 1},
                           {"config", flags.effective_config()},
                           {"seed", flags.seed},
                           {"input_hashes", inputs}};
    if (result.text_vocab)
        save_vocabulary(*result.text_vocab, flags.out_dir + "/vocab_text.json", envelope);
    if (result.code_vocab)
        save_vocabulary(*result.code_vocab, flags.out_dir + "/vocab_code.json", envelope);

    result.artifact.extra = {{"format_version", models::kModelFormatVersion},
                             {"config", flags.effective_config()},
                             {"seed", flags.seed},
                             {"input_hashes", inputs}};
    models::save_model(result.artifact, flags.out_dir + "/model.json");

    json report_doc = report_to_json(result.report, result.confusion, result.artifact.class_names);
    report_doc["format_version"] = 1;
    report_doc["config"] = flags.effective_config();
    report_doc["seed"] = flags.seed;
    report_doc["input_hashes"] = inputs;
    report_doc["train_size"] = result.train_size;
    report_doc["test_size"] = result.test_size;
    write_report_files(flags.out_dir, report_doc, result.report, result.confusion,
                       result.artifact.class_names);

    std::cout << "channel=" << flags.channel << " model=" << flags.model
              << " accuracy=" << result.report.accuracy << " macro_f1=" << result.report.macro_f1
              << " artifacts=" << flags.out_dir << "\n";
    return 0;
}

struct LoadedModel {
    models::ModelArtifact artifact;
    std::optional<Vocabulary> text_vocab;
    std::optional<Vocabulary> code_vocab;
};

LoadedModel load_model_with_vocabs(const std::string& model_path, const std::string& text_vocab_path,
                                   const std::string& code_vocab_path) {
    LoadedModel loaded;
    loaded.artifact = models::load_model(model_path);
    const bool want_text = loaded.artifact.channel != "code";
    const bool want_code = loaded.artifact.channel != "text";
    if (want_text) {
        if (text_vocab_path.empty())
            throw ConfigError("model channel " + loaded.artifact.channel +
                              " requires --vocab-text");
        loaded.text_vocab = load_vocabulary(text_vocab_path);
        pipeline::verify_vocab(loaded.artifact, *loaded.text_vocab);
    }
    if (want_code) {
        if (code_vocab_path.empty())
            throw ConfigError("model channel " + loaded.artifact.channel +
                              " requires --vocab-code");
        loaded.code_vocab = load_vocabulary(code_vocab_path);
        pipeline::verify_vocab(loaded.artifact, *loaded.code_vocab);
    }
    return loaded;
}

int cmd_evaluate(const std::string& model_path, const std::string& text_vocab_path,
                 const std::string& code_vocab_path, const std::string& corpus_path,
                 const std::string& out_dir) {
    const auto loaded = load_model_with_vocabs(model_path, text_vocab_path, code_vocab_path);
    const Corpus corpus = load_corpus(corpus_path);

    std::map<std::string, int> class_index;
    for (std::size_t i = 0; i < loaded.artifact.class_names.size(); ++i)
        class_index[loaded.artifact.class_names[i]] = static_cast<int>(i);

    std::vector<int> truth, predicted;
    for (const auto& q : corpus.questions) {
        const std::string label(language_name(q.label));
        const auto it = class_index.find(label);
        if (it == class_index.end())
            throw DataError("corpus language '" + label + "' is unknown to this model");
        pipeline::PredictionInput input;
        input.title = q.title;
        input.body = q.body_text;
        input.snippet = q.snippet;
        const auto pred = pipeline::predict(loaded.artifact,
                                            loaded.text_vocab ? &*loaded.text_vocab : nullptr,
                                            loaded.code_vocab ? &*loaded.code_vocab : nullptr, input);
        truth.push_back(it->second);
        predicted.push_back(class_index.at(pred.label));
    }
    const auto cm = eval::confusion_matrix(truth, predicted,
                                           static_cast<int>(loaded.artifact.class_names.size()));
    const auto report = eval::metrics_from_confusion(cm);

    fs::create_directories(out_dir);
    json report_doc = report_to_json(report, cm, loaded.artifact.class_names);
    report_doc["format_version"] = 1;
    report_doc["config"] = {{"model", model_path}, {"corpus", corpus_path}};
    report_doc["input_hashes"] = {{"model", hash_file(model_path)},
                                  {"corpus", hash_file(corpus_path)}};
    write_report_files(out_dir, report_doc, report, cm, loaded.artifact.class_names);
    std::cout << "accuracy=" << report.accuracy << " macro_f1=" << report.macro_f1
              << " artifacts=" << out_dir << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& text_vocab_path,
                const std::string& code_vocab_path, const std::string& input_path,
                std::optional<std::string> title, std::optional<std::string> body,
                std::optional<std::string> snippet) {
    const auto loaded = load_model_with_vocabs(model_path, text_vocab_path, code_vocab_path);
    pipeline::PredictionInput input;
    if (!input_path.empty()) {
        const json doc = load_json(input_path);
        if (doc.contains("title")) input.title = doc["title"].get<std::string>();
        if (doc.contains("body")) input.body = doc["body"].get<std::string>();
        if (doc.contains("snippet")) input.snippet = doc["snippet"].get<std::string>();
    }
    if (title) input.title = *title;
    if (body) input.body = *body;
    if (snippet) input.snippet = *snippet;

    const auto pred = pipeline::predict(loaded.artifact,
                                        loaded.text_vocab ? &*loaded.text_vocab : nullptr,
                                        loaded.code_vocab ? &*loaded.code_vocab : nullptr, input);
    json probs = json::object();
    for (std::size_t c = 0; c < pred.class_names.size(); ++c)
        probs[pred.class_names[c]] = pred.probabilities[c];
    const json out = {{"label", pred.label}, {"channel", pred.channel}, {"probabilities", probs}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_tune(const RunFlags& flags, int budget, int folds, const std::string& out_path) {
    const Corpus corpus = load_corpus(flags.corpus_path);
    const auto options = flags.to_options();
    const auto features = pipeline::build_features(corpus, options);

    eval::ParamSpace space;
    eval::TrainerFn trainer;
    const int workers = worker_count();
    if (flags.model == "nb") {
        space["alpha"] = {eval::ParamRange::Kind::log_real, 0.01, 10.0};
        trainer = [](const FeatureMatrix& train, const eval::ParamConfig& cfg) {
            const auto model = models::nb_fit(train, cfg.at("alpha"));
            return eval::Predictor([model](const SparseVector& x) { return model.predict(x); });
        };
    } else if (flags.model == "rf") {
        space["max_depth"] = {eval::ParamRange::Kind::integer, 4, 20};
        space["min_samples_leaf"] = {eval::ParamRange::Kind::integer, 1, 4};
        space["n_estimators"] = {eval::ParamRange::Kind::integer, 20, 150};
        trainer = [workers](const FeatureMatrix& train, const eval::ParamConfig& cfg) {
            models::ForestParams p;
            p.n_estimators = static_cast<int>(cfg.at("n_estimators"));
            p.max_depth = static_cast<int>(cfg.at("max_depth"));
            p.min_samples_leaf = static_cast<int>(cfg.at("min_samples_leaf"));
            const auto model = models::rf_fit(train, p, workers);
            return eval::Predictor([model](const SparseVector& x) { return model.predict(x); });
        };
    } else {
        space["eta"] = {eval::ParamRange::Kind::log_real, 0.05, 0.5};
        space["lambda"] = {eval::ParamRange::Kind::log_real, 0.1, 10.0};
        space["max_depth"] = {eval::ParamRange::Kind::integer, 3, 8};
        space["n_rounds"] = {eval::ParamRange::Kind::integer, 10, 60};
        trainer = [workers](const FeatureMatrix& train, const eval::ParamConfig& cfg) {
            models::BoostedParams p;
            p.eta = cfg.at("eta");
            p.lambda_l2 = cfg.at("lambda");
            p.max_depth = static_cast<int>(cfg.at("max_depth"));
            p.n_rounds = static_cast<int>(cfg.at("n_rounds"));
            const auto model = models::gbt_fit(train, p, workers);
            return eval::Predictor([model](const SparseVector& x) { return model.predict(x); });
        };
    }

    const auto result =
        eval::random_search(space, budget, folds, flags.seed, features.matrix, trainer);

    json trials = json::array();
    for (const auto& t : result.trials)
        trials.push_back({{"params", t.config},
                          {"fold_scores", t.fold_scores},
                          {"mean_accuracy", t.mean_accuracy},
                          {"failed", t.failed},
                          {"error", t.error}});
    json doc = {{"format_version", 1},
                {"config", flags.effective_config()},
                {"tune", {{"budget", budget}, {"folds", folds}}},
                {"seed", flags.seed},
                {"input_hashes", {{"corpus", hash_file(flags.corpus_path)}}},
                {"trials", std::move(trials)},
                {"best_index", result.best_index},
                {"best_params", result.best().config},
                {"best_mean_accuracy", result.best().mean_accuracy}};
    write_json(out_path, doc);
    std::cout << "best mean CV accuracy " << result.best().mean_accuracy << " with "
              << json(result.best().config).dump() << " -> " << out_path << "\n";
    return 0;
}

int cmd_snippet_study(const RunFlags& flags, const std::vector<int>& thresholds,
                      const std::string& out_path, bool print_table) {
    const Corpus corpus = load_corpus(flags.corpus_path);
    const auto options = flags.to_options();
    const auto outcomes = pipeline::snippet_length_experiment(corpus, thresholds, options);

    json rows = json::array();
    for (const auto& o : outcomes) {
        json row = {{"threshold", o.threshold},
                    {"skipped", o.skipped},
                    {"retained", o.retained}};
        if (o.skipped) {
            row["skip_reason"] = o.skip_reason;
        } else {
            row["accuracy"] = o.report.accuracy;
            row["macro_precision"] = o.report.macro_precision;
            row["macro_recall"] = o.report.macro_recall;
            row["macro_f1"] = o.report.macro_f1;
        }
        rows.push_back(std::move(row));
    }
    const json doc = {{"format_version", 1},
                      {"config", flags.effective_config()},
                      {"seed", flags.seed},
                      {"input_hashes", {{"corpus", hash_file(flags.corpus_path)}}},
                      {"thresholds", rows}};
    write_json(out_path, doc);

    if (print_table) {
        std::cout << "threshold  retained  accuracy  macro-F1\n";
        for (const auto& o : outcomes) {
            if (o.skipped)
                std::cout << o.threshold << "  skipped: " << o.skip_reason << "\n";
            else
                std::cout << o.threshold << "  " << o.retained << "  " << o.report.accuracy
                          << "  " << o.report.macro_f1 << "\n";
        }
    } else {
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_embed(const std::string& corpus_path, const std::string& language,
              const std::string& channel, const RunFlags& textprep_flags,
              const embed::SkipGramParams& params, const std::string& out_path) {
    const Corpus full = load_corpus(corpus_path);
    Corpus corpus;
    if (!language.empty()) {
        const auto lang = language_from_name(language);
        if (!lang) throw ConfigError("unknown language: " + language);
        for (const auto& q : full.questions)
            if (q.label == *lang) corpus.questions.push_back(q);
        if (corpus.questions.empty())
            throw DataError("corpus has no questions for language '" + language + "'");
    } else {
        corpus = full;
    }

    std::vector<TokenSeq> docs;
    if (channel == "code") {
        docs = pipeline::code_docs(corpus, textprep_flags.code_punct_tokens);
    } else if (channel == "text") {
        PipelineConfig prep;
        prep.stem = !textprep_flags.no_stem;
        prep.remove_stopwords = !textprep_flags.no_stopwords;
        prep.retain_entities = !textprep_flags.no_entities;
        prep.min_token_len = textprep_flags.min_token_len;
        if (prep.remove_stopwords)
            prep.stopword_list = load_stopwords(textprep_flags.stopwords_path);
        docs = pipeline::text_docs(corpus, prep);
    } else {
        throw ConfigError("embed channel must be text or code");
    }

    const auto model = embed::train_skipgram(docs, params);
    const json extra = {{"config",
                         {{"corpus", corpus_path},
                          {"language", language},
                          {"channel", channel},
                          {"embed.dim", params.dim},
                          {"embed.window", params.window},
                          {"embed.negatives", params.negatives},
                          {"embed.epochs", params.epochs},
                          {"embed.initial_lr", params.initial_lr},
                          {"seed", params.seed}}},
                        {"input_hashes", {{"corpus", hash_file(corpus_path)}}}};
    embed::save_embedding(model, out_path, extra);
    std::cout << "trained " << model.size() << "-term embedding (" << params.dim
              << " dims) on " << docs.size() << " documents -> " << out_path << "\n";
    return 0;
}

int cmd_project(const std::string& embedding_path, double fraction,
                const embed::TsneParams& params, const std::string& out_path, int neighbors,
                const std::string& neighbors_path) {
    const auto model = embed::load_embedding(embedding_path);
    const auto selected = embed::select_top_frequent(model, fraction);
    std::vector<std::vector<double>> vectors;
    vectors.reserve(selected.size());
    for (const int idx : selected)
        vectors.push_back(model.input_vectors[static_cast<std::size_t>(idx)]);

    const auto projection = embed::tsne_project(vectors, params);

    std::ostringstream csv;
    csv << "term,x,y,frequency\n";
    char buf[64];
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto idx = static_cast<std::size_t>(selected[i]);
        csv << model.vocab[idx] << ',';
        auto r1 = std::to_chars(buf, buf + sizeof(buf), projection.points[i][0]);
        csv << std::string_view(buf, r1.ptr) << ',';
        auto r2 = std::to_chars(buf, buf + sizeof(buf), projection.points[i][1]);
        csv << std::string_view(buf, r2.ptr) << ',';
        csv << model.freq[idx] << '\n';
    }
    write_text(out_path, csv.str());

    const json meta = {{"format_version", 1},
                       {"config",
                        {{"embedding", embedding_path},
                         {"project.fraction", fraction},
                         {"tsne.perplexity", params.perplexity},
                         {"tsne.iterations", params.iterations},
                         {"tsne.learning_rate", params.learning_rate},
                         {"seed", params.seed}}},
                       {"input_hashes", {{"embedding", hash_file(embedding_path)}}},
                       {"kl_trace", projection.kl_trace}};
    write_json(out_path + ".meta.json", meta);

    if (neighbors > 0) {
        json tables = json::object();
        for (const int idx : selected) {
            const auto& term = model.vocab[static_cast<std::size_t>(idx)];
            json list = json::array();
            for (const auto& [other, sim] : embed::most_similar(model, term, neighbors))
                list.push_back({{"term", other}, {"similarity", sim}});
            tables[term] = std::move(list);
        }
        write_json(neighbors_path.empty() ? out_path + ".neighbors.json" : neighbors_path,
                   tables);
    }
    std::cout << "projected " << selected.size() << " terms -> " << out_path
              << " (final KL " << projection.kl_trace.back() << ")\n";
    return 0;
}

int cmd_report(const std::string& report_path, bool percent) {
    const json doc = load_json(report_path);
    const auto class_names = doc.at("class_names").get<std::vector<std::string>>();
    if (percent) {
        eval::ConfusionMatrix cm;
        cm.counts = doc.at("confusion").get<std::vector<std::vector<long long>>>();
        cm.n_classes = static_cast<int>(cm.counts.size());
        std::cout << eval::render_confusion_csv(cm, class_names, true);
        return 0;
    }
    eval::MetricsReport report;
    report.accuracy = doc.at("accuracy").get<double>();
    report.macro_precision = doc.at("macro_precision").get<double>();
    report.macro_recall = doc.at("macro_recall").get<double>();
    report.macro_f1 = doc.at("macro_f1").get<double>();
    for (const auto& entry : doc.at("per_class")) {
        eval::ClassMetrics m;
        m.precision = entry.at("precision").get<double>();
        m.recall = entry.at("recall").get<double>();
        m.f1 = entry.at("f1").get<double>();
        m.support = entry.at("support").get<long long>();
        m.zero_division = entry.at("zero_division").get<bool>();
        report.per_class.push_back(m);
    }
    std::cout << eval::render_metrics_table(report, class_names);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Programming-language identification for developer Q&A posts"};
    app.require_subcommand(1);
    // values from a config file fill whatever the command line leaves unset;
    // sections name the subcommand, e.g. [train] min-df = 5
    app.set_config("--config", "", "Config file with per-subcommand sections");

    // generate-corpus
    auto* gen_cmd = app.add_subcommand("generate-corpus", "Write a synthetic keyword-pool corpus");
    std::string gen_out = "corpus.jsonl";
    pipeline::GeneratorOptions gen;
    gen_cmd->add_option("--out", gen_out, "Output corpus path");
    gen_cmd->add_option("--languages", gen.languages, "Number of languages");
    gen_cmd->add_option("--per-language", gen.per_language, "Questions per language");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--pool-size", gen.pool_size, "Keywords per language and channel");
    gen_cmd->add_option("--overlap", gen.overlap, "Shared fraction of each pool");
    gen_cmd->add_option("--short-frac", gen.short_snippet_fraction,
                        "Fraction of questions with short noise snippets");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse a posts dump into a corpus file");
    std::string dump_path, ingest_out = "corpus.jsonl", tag_map_path;
    int min_snippet_chars = 10;
    bool abort_on_error = false;
    ingest_cmd->add_option("--dump", dump_path, "Posts dump file")->required();
    ingest_cmd->add_option("--out", ingest_out, "Output corpus path");
    ingest_cmd->add_option("--tag-map", tag_map_path, "Tag->language JSON map (default: built-in)");
    ingest_cmd->add_option("--min-snippet-chars", min_snippet_chars, "Snippet length floor");
    ingest_cmd->add_flag("--abort-on-error", abort_on_error, "Stop at the first malformed row");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Balanced per-language subsample");
    std::string sample_in, sample_out = "sampled.jsonl";
    int per_language = 10000;
    std::uint64_t sample_seed = 0;
    sample_cmd->add_option("--in", sample_in, "Input corpus")->required();
    sample_cmd->add_option("--out", sample_out, "Output corpus");
    sample_cmd->add_option("--per-language", per_language, "Samples per language");
    sample_cmd->add_option("--seed", sample_seed, "Random seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "Fit a classifier and evaluate the holdout");
    RunFlags train_flags;
    train_flags.register_common(train_cmd);
    train_cmd->add_option("--out-dir", train_flags.out_dir, "Artifact directory");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a saved model on a corpus");
    std::string eval_model, eval_vocab_text, eval_vocab_code, eval_corpus, eval_out = "eval";
    eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
    eval_cmd->add_option("--vocab-text", eval_vocab_text, "Text vocabulary JSON");
    eval_cmd->add_option("--vocab-code", eval_vocab_code, "Code vocabulary JSON");
    eval_cmd->add_option("--corpus", eval_corpus, "Corpus to score")->required();
    eval_cmd->add_option("--out-dir", eval_out, "Artifact directory");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Classify one post");
    std::string pred_model, pred_vocab_text, pred_vocab_code, pred_input;
    std::string pred_title, pred_body, pred_snippet;
    bool has_title = false, has_body = false, has_snippet = false;
    predict_cmd->add_option("--model", pred_model, "Model JSON")->required();
    predict_cmd->add_option("--vocab-text", pred_vocab_text, "Text vocabulary JSON");
    predict_cmd->add_option("--vocab-code", pred_vocab_code, "Code vocabulary JSON");
    predict_cmd->add_option("--input", pred_input, "JSON file with title/body/snippet");
    auto* title_opt = predict_cmd->add_option("--title", pred_title, "Post title");
    auto* body_opt = predict_cmd->add_option("--body", pred_body, "Post body text");
    auto* snippet_opt = predict_cmd->add_option("--snippet", pred_snippet, "Code snippet");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "Random hyperparameter search");
    RunFlags tune_flags;
    tune_flags.register_common(tune_cmd);
    int budget = 10, folds = 10;
    std::string tune_out = "trials.json";
    tune_cmd->add_option("--budget", budget, "Number of sampled configs");
    tune_cmd->add_option("--folds", folds, "Cross-validation folds");
    tune_cmd->add_option("--out", tune_out, "Trials JSON path");

    // snippet-length-study
    auto* study_cmd = app.add_subcommand("snippet-length-study",
                                         "Accuracy versus minimum snippet length");
    RunFlags study_flags;
    study_flags.register_common(study_cmd);
    std::vector<int> thresholds = {10, 25, 50, 75, 100};
    std::string study_out = "study.json";
    bool study_table = false;
    study_cmd->add_option("--thresholds", thresholds, "Ascending character floors");
    study_cmd->add_option("--out", study_out, "Study JSON path");
    study_cmd->add_flag("--table", study_table, "Print a summary table");

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "Train word embeddings for one language/channel");
    std::string embed_corpus, embed_language, embed_channel = "code", embed_out = "embedding.json";
    RunFlags embed_textprep;
    embed::SkipGramParams sg;
    embed_cmd->add_option("--corpus", embed_corpus, "Corpus JSON-lines file")->required();
    embed_cmd->add_option("--language", embed_language, "Restrict to one language (empty = all)");
    embed_cmd->add_option("--channel", embed_channel, "text or code")
        ->check(CLI::IsMember({"text", "code"}));
    embed_cmd->add_option("--dim", sg.dim, "Embedding dimensions");
    embed_cmd->add_option("--window", sg.window, "Context window");
    embed_cmd->add_option("--negatives", sg.negatives, "Negative samples per pair");
    embed_cmd->add_option("--epochs", sg.epochs, "Training epochs");
    embed_cmd->add_option("--lr", sg.initial_lr, "Initial learning rate");
    embed_cmd->add_option("--seed", sg.seed, "Random seed");
    embed_cmd->add_option("--out", embed_out, "Embedding JSON path");
    embed_cmd->add_flag("--no-stem", embed_textprep.no_stem, "Disable stemming (text channel)");
    embed_cmd->add_flag("--no-stopwords", embed_textprep.no_stopwords,
                        "Disable stop words (text channel)");
    embed_cmd->add_flag("--no-entities", embed_textprep.no_entities,
                        "Disable identifier retention (text channel)");
    embed_cmd->add_option("--min-token-len", embed_textprep.min_token_len, "Minimum token length");
    embed_cmd->add_option("--stopwords", embed_textprep.stopwords_path, "Stop-word list file");
    embed_cmd->add_flag("--code-punct-tokens", embed_textprep.code_punct_tokens,
                        "Punctuation runs as code tokens");

    // project
    auto* project_cmd = app.add_subcommand("project", "t-SNE projection of frequent terms");
    std::string project_embedding, project_out = "projection.csv", neighbors_out;
    double fraction = 0.03;
    int neighbors = 0;
    embed::TsneParams tsne;
    project_cmd->add_option("--embedding", project_embedding, "Embedding JSON")->required();
    project_cmd->add_option("--fraction", fraction, "Top-frequency fraction to project");
    project_cmd->add_option("--perplexity", tsne.perplexity, "t-SNE perplexity");
    project_cmd->add_option("--iterations", tsne.iterations, "Gradient descent iterations");
    project_cmd->add_option("--learning-rate", tsne.learning_rate, "t-SNE learning rate");
    project_cmd->add_option("--seed", tsne.seed, "Random seed");
    project_cmd->add_option("--out", project_out, "Projection CSV path");
    project_cmd->add_option("--neighbors", neighbors, "Also write top-k neighbor tables");
    project_cmd->add_option("--neighbors-out", neighbors_out, "Neighbor table JSON path");

    // report
    auto* report_cmd = app.add_subcommand("report", "Render a report JSON as a table");
    std::string report_path;
    bool report_percent = false;
    report_cmd->add_option("--report", report_path, "Report JSON")->required();
    report_cmd->add_flag("--percent", report_percent, "Print the row-normalized confusion matrix");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) return cmd_generate_corpus(gen_out, gen);
        if (ingest_cmd->parsed())
            return cmd_ingest(dump_path, ingest_out, tag_map_path, min_snippet_chars,
                              abort_on_error);
        if (sample_cmd->parsed())
            return cmd_sample(sample_in, sample_out, per_language, sample_seed);
        if (train_cmd->parsed()) return cmd_train(train_flags);
        if (eval_cmd->parsed())
            return cmd_evaluate(eval_model, eval_vocab_text, eval_vocab_code, eval_corpus,
                                eval_out);
        if (predict_cmd->parsed()) {
            has_title = title_opt->count() > 0;
            has_body = body_opt->count() > 0;
            has_snippet = snippet_opt->count() > 0;
            return cmd_predict(pred_model, pred_vocab_text, pred_vocab_code, pred_input,
                               has_title ? std::optional(pred_title) : std::nullopt,
                               has_body ? std::optional(pred_body) : std::nullopt,
                               has_snippet ? std::optional(pred_snippet) : std::nullopt);
        }
        if (tune_cmd->parsed()) return cmd_tune(tune_flags, budget, folds, tune_out);
        if (study_cmd->parsed())
            return cmd_snippet_study(study_flags, thresholds, study_out, study_table);
        if (embed_cmd->parsed())
            return cmd_embed(embed_corpus, embed_language, embed_channel, embed_textprep, sg,
                             embed_out);
        if (project_cmd->parsed())
            return cmd_project(project_embedding, fraction, tsne, project_out, neighbors,
                               neighbors_out);
        if (report_cmd->parsed()) return cmd_report(report_path, report_percent);
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
