#include "polyglot/embed/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::embed {

using nlohmann::json;

int EmbeddingModel::index_of(const std::string& term) const {
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i] == term) return static_cast<int>(i);
    return -1;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

double sigmoid(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

EmbeddingModel train_skipgram(const std::vector<TokenSeq>& docs, const SkipGramParams& params) {
    if (docs.empty()) throw DataError("train_skipgram: no documents");
    if (params.dim < 2) throw ConfigError("train_skipgram: dim must be >= 2");
    if (params.window < 1) throw ConfigError("train_skipgram: window must be >= 1");
    if (params.epochs < 1) throw ConfigError("train_skipgram: epochs must be >= 1");

    std::map<std::string, std::int64_t> counts;
    std::int64_t total_words = 0;
    for (const auto& doc : docs)
        for (const auto& tok : doc) {
            counts[tok]++;
            total_words++;
        }
    if (counts.size() < 2)
        throw DataError("train_skipgram: vocabulary has " + std::to_string(counts.size()) +
                        " term(s), need at least 2");

    EmbeddingModel model;
    model.params = params;
    model.vocab.reserve(counts.size());
    for (const auto& [term, c] : counts) model.vocab.push_back(term);
    std::sort(model.vocab.begin(), model.vocab.end(), [&](const auto& a, const auto& b) {
        const auto ca = counts.at(a), cb = counts.at(b);
        return ca != cb ? ca > cb : a < b;
    });
    model.freq.reserve(model.vocab.size());
    std::map<std::string, int> term_id;
    for (std::size_t i = 0; i < model.vocab.size(); ++i) {
        model.freq.push_back(counts.at(model.vocab[i]));
        term_id[model.vocab[i]] = static_cast<int>(i);
    }
    const auto v = model.vocab.size();
    const auto dim = static_cast<std::size_t>(params.dim);

    // negatives ~ unigram^0.75 through a cumulative table
    std::vector<double> noise_cdf(v);
    double z = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        z += std::pow(static_cast<double>(model.freq[i]), 0.75);
        noise_cdf[i] = z;
    }
    for (double& c : noise_cdf) c /= z;

    Rng rng(params.seed);
    model.input_vectors.assign(v, std::vector<double>(dim));
    model.output_vectors.assign(v, std::vector<double>(dim, 0.0));
    for (auto& row : model.input_vectors)
        for (auto& x : row) x = (rng.unit() - 0.5) / static_cast<double>(params.dim);

    std::vector<std::vector<int>> encoded(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        encoded[d].reserve(docs[d].size());
        for (const auto& tok : docs[d]) encoded[d].push_back(term_id.at(tok));
    }

    auto draw_negative = [&]() {
        const double u = rng.unit();
        const auto it = std::lower_bound(noise_cdf.begin(), noise_cdf.end(), u);
        return static_cast<int>(it - noise_cdf.begin());
    };

    const double planned = static_cast<double>(params.epochs) * static_cast<double>(total_words);
    std::int64_t processed = 0;
    std::vector<double> accum(dim);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::int64_t pair_count = 0;
        for (const auto& doc : encoded) {
            const int len = static_cast<int>(doc.size());
            for (int pos = 0; pos < len; ++pos) {
                const double lr = params.initial_lr *
                                  std::max(1e-4, 1.0 - static_cast<double>(processed) / (planned + 1.0));
                processed++;
                const int center = doc[static_cast<std::size_t>(pos)];
                const int span = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.window)));
                for (int off = -span; off <= span; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= len) continue;
                    const int context = doc[static_cast<std::size_t>(cpos)];

                    auto& input = model.input_vectors[static_cast<std::size_t>(context)];
                    std::fill(accum.begin(), accum.end(), 0.0);
                    for (int s = 0; s <= params.negatives; ++s) {
                        int target;
                        double label;
                        if (s == 0) {
                            target = center;
                            label = 1.0;
                        } else {
                            target = draw_negative();
                            if (target == center) continue;
                            label = 0.0;
                        }
                        auto& output = model.output_vectors[static_cast<std::size_t>(target)];
                        double dot = 0.0;
                        for (std::size_t i = 0; i < dim; ++i) dot += input[i] * output[i];
                        const double p = sigmoid(dot);
                        loss_sum += label > 0.5 ? -std::log(std::max(p, 1e-12))
                                                : -std::log(std::max(1.0 - p, 1e-12));
                        const double g = (label - p) * lr;
                        for (std::size_t i = 0; i < dim; ++i) {
                            accum[i] += g * output[i];
                            output[i] += g * input[i];
                        }
                    }
                    for (std::size_t i = 0; i < dim; ++i) input[i] += accum[i];
                    pair_count++;
                }
            }
        }
        model.epoch_loss.push_back(pair_count > 0 ? loss_sum / static_cast<double>(pair_count) : 0.0);
    }
    return model;
}

std::vector<std::pair<std::string, double>> most_similar(const EmbeddingModel& model,
                                                         const std::string& term, int k) {
    if (k < 1) throw ConfigError("most_similar: k must be >= 1");
    const int q = model.index_of(term);
    if (q < 0) throw DataError("most_similar: unknown term '" + term + "'");
    std::vector<std::pair<double, int>> scored;  // (-similarity, vocab index) for stable order
    scored.reserve(model.size() - 1);
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (static_cast<int>(i) == q) continue;
        scored.emplace_back(-cosine(model.input_vectors[static_cast<std::size_t>(q)],
                                    model.input_vectors[i]),
                            static_cast<int>(i));
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::pair<std::string, double>> out;
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.emplace_back(model.vocab[static_cast<std::size_t>(scored[i].second)], -scored[i].first);
    return out;
}

std::vector<int> select_top_frequent(const EmbeddingModel& model, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw ConfigError("select_top_frequent: fraction must be in (0, 1]");
    const auto want = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(model.size())));
    std::vector<int> out;
    out.reserve(want);
    // vocab is already ordered by descending frequency with ties alphabetical
    for (std::size_t i = 0; i < want && i < model.size(); ++i) out.push_back(static_cast<int>(i));
    return out;
}

void save_embedding(const EmbeddingModel& model, const std::string& path,
                    const nlohmann::json& extra) {
    json vocab = json::array();
    for (std::size_t i = 0; i < model.size(); ++i)
        vocab.push_back({{"term", model.vocab[i]}, {"freq", model.freq[i]}});
    json doc = {{"format_version", 1},
                {"dim", model.params.dim},
                {"window", model.params.window},
                {"negatives", model.params.negatives},
                {"epochs", model.params.epochs},
                {"initial_lr", model.params.initial_lr},
                {"seed", model.params.seed},
                {"vocab", std::move(vocab)},
                {"epoch_loss", model.epoch_loss},
                {"input_vectors", model.input_vectors},
                {"output_vectors", model.output_vectors}};
    for (const auto& [key, value] : extra.items()) doc[key] = value;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write embedding: " + path);
    out << doc.dump() << '\n';
}

EmbeddingModel load_embedding(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embedding: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("embedding " + path + ": " + e.what());
    }
    EmbeddingModel model;
    model.params.dim = doc.at("dim").get<int>();
    model.params.window = doc.at("window").get<int>();
    model.params.negatives = doc.at("negatives").get<int>();
    model.params.epochs = doc.at("epochs").get<int>();
    model.params.initial_lr = doc.at("initial_lr").get<double>();
    model.params.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& entry : doc.at("vocab")) {
        model.vocab.push_back(entry.at("term").get<std::string>());
        model.freq.push_back(entry.at("freq").get<std::int64_t>());
    }
    model.epoch_loss = doc.at("epoch_loss").get<std::vector<double>>();
    model.input_vectors = doc.at("input_vectors").get<std::vector<std::vector<double>>>();
    model.output_vectors = doc.at("output_vectors").get<std::vector<std::vector<double>>>();
    return model;
}

}  // namespace polyglot::embed
