#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyglot/textprep.hpp"

namespace polyglot::embed {

struct SkipGramParams {
    int dim = 300;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double initial_lr = 0.025;
    std::uint64_t seed = 0;
};

struct EmbeddingModel {
    SkipGramParams params;
    std::vector<std::string> vocab;  // descending frequency, ties alphabetical
    std::vector<std::int64_t> freq;
    // row-major [term][dim]
    std::vector<std::vector<double>> input_vectors;
    std::vector<std::vector<double>> output_vectors;
    std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch

    int index_of(const std::string& term) const;  // -1 when absent
    std::size_t size() const { return vocab.size(); }
};

// Skip-gram with negative sampling: dynamic context window in [1, window],
// negatives from the unigram distribution raised to 0.75, linearly decaying
// learning rate. Single-threaded, bitwise deterministic under seed.
EmbeddingModel train_skipgram(const std::vector<TokenSeq>& docs, const SkipGramParams& params);

// Cosine similarity over input vectors, query excluded, ties by vocab order.
std::vector<std::pair<std::string, double>> most_similar(const EmbeddingModel& model,
                                                         const std::string& term, int k);

// Indices of the ceil(fraction * V) most frequent terms, in vocab order.
std::vector<int> select_top_frequent(const EmbeddingModel& model, double fraction);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// `extra` entries (run config, input hashes) are merged into the envelope.
void save_embedding(const EmbeddingModel& model, const std::string& path,
                    const nlohmann::json& extra = nlohmann::json::object());
EmbeddingModel load_embedding(const std::string& path);

}  // namespace polyglot::embed
