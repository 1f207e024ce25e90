#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polyglot/models/boosted.hpp"
#include "polyglot/models/naive_bayes.hpp"
#include "polyglot/models/random_forest.hpp"
#include "polyglot/textprep.hpp"

namespace polyglot::models {

inline constexpr int kModelFormatVersion = 1;

// Versioned on-disk envelope for a fitted classifier. `extra` carries the
// run-level metadata (effective config, seed, input hashes) the CLI echoes
// into every artifact.
struct ModelArtifact {
    std::string channel;  // text | code | combined
    std::vector<std::string> class_names;
    std::map<std::string, std::string> vocab_hashes;  // channel name -> content hash
    PipelineConfig preprocessing;
    int min_df = 1;
    bool code_punct_tokens = false;
    nlohmann::json extra;
    std::variant<NaiveBayesModel, RandomForestModel, BoostedModel> model;

    std::string model_type() const;
    int predict(const SparseVector& x) const;
    std::vector<double> predict_proba(const SparseVector& x) const;  // rf: vote shares
    int n_classes() const;
};

void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

}  // namespace polyglot::models
