#include "polyglot/models/store.hpp"

#include <fstream>

#include "polyglot/util/errors.hpp"

namespace polyglot::models {

using nlohmann::json;

namespace {

json tree_to_json(const DecisionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        json entry = {n.feature, n.threshold, n.left, n.right, n.value, n.class_counts};
        nodes.push_back(std::move(entry));
    }
    return {{"dim", tree.dim}, {"n_classes", tree.n_classes}, {"nodes", std::move(nodes)}};
}

DecisionTree tree_from_json(const json& doc) {
    DecisionTree tree;
    tree.dim = doc.at("dim").get<int>();
    tree.n_classes = doc.at("n_classes").get<int>();
    for (const auto& entry : doc.at("nodes")) {
        TreeNode n;
        n.feature = entry.at(0).get<int>();
        n.threshold = entry.at(1).get<double>();
        n.left = entry.at(2).get<int>();
        n.right = entry.at(3).get<int>();
        n.value = entry.at(4).get<double>();
        n.class_counts = entry.at(5).get<std::vector<double>>();
        tree.nodes.push_back(std::move(n));
    }
    return tree;
}

json preprocessing_to_json(const PipelineConfig& p) {
    return {{"strip_non_alphanumeric", p.strip_non_alphanumeric},
            {"remove_stopwords", p.remove_stopwords},
            {"retain_entities", p.retain_entities},
            {"stem", p.stem},
            {"min_token_len", p.min_token_len},
            {"stopwords", p.stopword_list}};
}

PipelineConfig preprocessing_from_json(const json& doc) {
    PipelineConfig p;
    p.strip_non_alphanumeric = doc.at("strip_non_alphanumeric").get<bool>();
    p.remove_stopwords = doc.at("remove_stopwords").get<bool>();
    p.retain_entities = doc.at("retain_entities").get<bool>();
    p.stem = doc.at("stem").get<bool>();
    p.min_token_len = doc.at("min_token_len").get<int>();
    p.stopword_list = doc.at("stopwords").get<std::set<std::string>>();
    return p;
}

}  // namespace

std::string ModelArtifact::model_type() const {
    if (std::holds_alternative<NaiveBayesModel>(model)) return "nb";
    if (std::holds_alternative<RandomForestModel>(model)) return "rf";
    return "gbt";
}

int ModelArtifact::n_classes() const {
    return std::visit([](const auto& m) { return m.n_classes; }, model);
}

int ModelArtifact::predict(const SparseVector& x) const {
    return std::visit([&x](const auto& m) { return m.predict(x); }, model);
}

std::vector<double> ModelArtifact::predict_proba(const SparseVector& x) const {
    if (const auto* nb = std::get_if<NaiveBayesModel>(&model)) return nb->predict_proba(x);
    if (const auto* gbt = std::get_if<BoostedModel>(&model)) return gbt->predict_proba(x);
    const auto& rf = std::get<RandomForestModel>(model);
    std::vector<double> votes(static_cast<std::size_t>(rf.n_classes), 0.0);
    for (const auto& tree : rf.trees)
        votes[static_cast<std::size_t>(tree.predict_class(x))] += 1.0;
    for (double& v : votes) v /= static_cast<double>(rf.trees.size());
    return votes;
}

void save_model(const ModelArtifact& artifact, const std::string& path) {
    json doc = {{"format_version", kModelFormatVersion},
                {"model_type", artifact.model_type()},
                {"channel", artifact.channel},
                {"class_names", artifact.class_names},
                {"vocab_hashes", artifact.vocab_hashes},
                {"preprocessing", preprocessing_to_json(artifact.preprocessing)},
                {"min_df", artifact.min_df},
                {"code_punct_tokens", artifact.code_punct_tokens}};
    for (const auto& [key, value] : artifact.extra.items()) doc[key] = value;

    json body;
    if (const auto* nb = std::get_if<NaiveBayesModel>(&artifact.model)) {
        body = {{"alpha", nb->alpha},
                {"n_classes", nb->n_classes},
                {"dim", nb->dim},
                {"class_log_prior", nb->class_log_prior},
                {"term_log_prob", nb->term_log_prob}};
    } else if (const auto* rf = std::get_if<RandomForestModel>(&artifact.model)) {
        json trees = json::array();
        for (const auto& t : rf->trees) trees.push_back(tree_to_json(t));
        body = {{"n_estimators", rf->params.n_estimators},
                {"max_depth", rf->params.max_depth},
                {"features_per_split", rf->params.features_per_split},
                {"min_samples_leaf", rf->params.min_samples_leaf},
                {"seed", rf->params.seed},
                {"n_classes", rf->n_classes},
                {"dim", rf->dim},
                {"trees", std::move(trees)}};
    } else {
        const auto& gbt = std::get<BoostedModel>(artifact.model);
        json rounds = json::array();
        for (const auto& round : gbt.rounds) {
            json per_class = json::array();
            for (const auto& t : round) per_class.push_back(tree_to_json(t));
            rounds.push_back(std::move(per_class));
        }
        body = {{"n_rounds", gbt.params.n_rounds},
                {"eta", gbt.params.eta},
                {"lambda_l2", gbt.params.lambda_l2},
                {"alpha_l1", gbt.params.alpha_l1},
                {"min_split_gain", gbt.params.min_split_gain},
                {"min_child_weight", gbt.params.min_child_weight},
                {"max_depth", gbt.params.max_depth},
                {"seed", gbt.params.seed},
                {"n_classes", gbt.n_classes},
                {"dim", gbt.dim},
                {"base_score", gbt.base_score},
                {"train_loss", gbt.train_loss},
                {"rounds", std::move(rounds)}};
    }
    doc["model"] = std::move(body);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path);
    out << doc.dump(1) << '\n';
}

ModelArtifact load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("model " + path + ": " + e.what());
    }
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
        throw DataError("model " + path + ": unsupported format_version");

    ModelArtifact artifact;
    artifact.channel = doc.at("channel").get<std::string>();
    artifact.class_names = doc.at("class_names").get<std::vector<std::string>>();
    artifact.vocab_hashes = doc.at("vocab_hashes").get<std::map<std::string, std::string>>();
    artifact.preprocessing = preprocessing_from_json(doc.at("preprocessing"));
    artifact.min_df = doc.at("min_df").get<int>();
    artifact.code_punct_tokens = doc.at("code_punct_tokens").get<bool>();
    for (const auto& [key, value] : doc.items()) {
        if (key == "format_version" || key == "model_type" || key == "channel" ||
            key == "class_names" || key == "vocab_hashes" || key == "preprocessing" ||
            key == "min_df" || key == "code_punct_tokens" || key == "model")
            continue;
        artifact.extra[key] = value;
    }

    const std::string type = doc.at("model_type").get<std::string>();
    const json& body = doc.at("model");
    if (type == "nb") {
        NaiveBayesModel nb;
        nb.alpha = body.at("alpha").get<double>();
        nb.n_classes = body.at("n_classes").get<int>();
        nb.dim = body.at("dim").get<int>();
        nb.class_log_prior = body.at("class_log_prior").get<std::vector<double>>();
        nb.term_log_prob = body.at("term_log_prob").get<std::vector<std::vector<double>>>();
        artifact.model = std::move(nb);
    } else if (type == "rf") {
        RandomForestModel rf;
        rf.params.n_estimators = body.at("n_estimators").get<int>();
        rf.params.max_depth = body.at("max_depth").get<int>();
        rf.params.features_per_split = body.at("features_per_split").get<int>();
        rf.params.min_samples_leaf = body.at("min_samples_leaf").get<int>();
        rf.params.seed = body.at("seed").get<std::uint64_t>();
        rf.n_classes = body.at("n_classes").get<int>();
        rf.dim = body.at("dim").get<int>();
        for (const auto& t : body.at("trees")) rf.trees.push_back(tree_from_json(t));
        artifact.model = std::move(rf);
    } else if (type == "gbt") {
        BoostedModel gbt;
        gbt.params.n_rounds = body.at("n_rounds").get<int>();
        gbt.params.eta = body.at("eta").get<double>();
        gbt.params.lambda_l2 = body.at("lambda_l2").get<double>();
        gbt.params.alpha_l1 = body.at("alpha_l1").get<double>();
        gbt.params.min_split_gain = body.at("min_split_gain").get<double>();
        gbt.params.min_child_weight = body.at("min_child_weight").get<double>();
        gbt.params.max_depth = body.at("max_depth").get<int>();
        gbt.params.seed = body.at("seed").get<std::uint64_t>();
        gbt.n_classes = body.at("n_classes").get<int>();
        gbt.dim = body.at("dim").get<int>();
        gbt.base_score = body.at("base_score").get<std::vector<double>>();
        gbt.train_loss = body.at("train_loss").get<std::vector<double>>();
        for (const auto& round : body.at("rounds")) {
            std::vector<DecisionTree> per_class;
            for (const auto& t : round) per_class.push_back(tree_from_json(t));
            gbt.rounds.push_back(std::move(per_class));
        }
        artifact.model = std::move(gbt);
    } else {
        throw DataError("model " + path + ": unknown model_type '" + type + "'");
    }
    return artifact;
}

}  // namespace polyglot::models
