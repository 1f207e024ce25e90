#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "polyglot/textprep.hpp"

namespace polyglot {

enum class Channel { text, code };

std::string_view channel_name(Channel c);
Channel channel_from_name(std::string_view name);

// Fitted per-channel term dictionary. Terms are indexed alphabetically;
// idf uses the smoothed form ln((1+N)/(1+df)) + 1, which is always > 0.
struct Vocabulary {
    Channel channel = Channel::text;
    std::size_t n_docs = 0;
    int min_df = 1;
    std::vector<std::string> terms;  // sorted; index in this vector = term index
    std::vector<int> doc_freq;
    std::vector<double> idf;

    std::size_t size() const { return terms.size(); }
    // -1 when the term is out of vocabulary
    int index_of(std::string_view term) const;
    // stable content hash used to pair models with the vocabulary they saw
    std::string content_hash() const;
};

// L2-normalized tf-idf document vector; entries sorted by index.
struct SparseVector {
    std::vector<std::pair<int, double>> entries;
    int dim = 0;

    double norm() const;
    double at(int index) const;  // 0.0 for absent entries
};

struct FeatureMatrix {
    std::vector<SparseVector> rows;
    std::vector<int> labels;  // class codes in [0, n_classes)
    int n_classes = 0;
    int dim = 0;
    // set for combined matrices, (0,0) otherwise
    std::pair<int, int> channel_dims{0, 0};
};

// Lowercased maximal runs of [A-Za-z0-9_] of length >= 2, in order. The
// preprocessing pipeline is deliberately not applied to code. With
// punct_tokens set, maximal runs of non-space punctuation are emitted as
// tokens too (non-default mode).
TokenSeq tokenize_code(std::string_view snippet, bool punct_tokens = false);

// Keeps exactly the terms present in >= min_df distinct documents. Throws
// EmptyVocabulary when nothing survives.
Vocabulary fit_vocabulary(const std::vector<TokenSeq>& docs, int min_df, Channel channel);

// weight(t) = count(t) * idf(t), L2-normalized. A fully out-of-vocabulary
// document becomes the zero vector.
SparseVector vectorize(const TokenSeq& doc, const Vocabulary& vocab);

// Concatenates channels; code indices are offset by the text dimension and
// each block keeps its own normalization.
SparseVector combine_channels(const SparseVector& text_vec, const SparseVector& code_vec);

// {channel, n_docs, min_df, terms:[{term, df, idf}]} sorted by term; extra
// entries (run config, input hashes) are merged into the envelope.
void save_vocabulary(const Vocabulary& vocab, const std::string& path,
                     const nlohmann::json& extra = nlohmann::json::object());
Vocabulary load_vocabulary(const std::string& path);

// Sparse triplet text: header "rows cols nnz", then one "row col weight"
// line per entry, weights printed with round-trip precision.
void save_matrix(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_matrix(const std::string& path);

}  // namespace polyglot
