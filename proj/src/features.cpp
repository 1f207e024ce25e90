#include "polyglot/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/hash.hpp"

namespace polyglot {

using nlohmann::json;

std::string_view channel_name(Channel c) { return c == Channel::text ? "text" : "code"; }

Channel channel_from_name(std::string_view name) {
    if (name == "text") return Channel::text;
    if (name == "code") return Channel::code;
    throw ConfigError("unknown channel: " + std::string(name));
}

int Vocabulary::index_of(std::string_view term) const {
    const auto it = std::lower_bound(terms.begin(), terms.end(), term);
    if (it == terms.end() || *it != term) return -1;
    return static_cast<int>(it - terms.begin());
}

std::string Vocabulary::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::string_view s) { h = fnv1a64(s, h); h = fnv1a64("\x1f", h); };
    feed(channel_name(channel));
    feed(std::to_string(n_docs));
    feed(std::to_string(min_df));
    for (std::size_t i = 0; i < terms.size(); ++i) {
        feed(terms[i]);
        feed(std::to_string(doc_freq[i]));
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(double));
        std::memcpy(&bits, &idf[i], sizeof(bits));
        feed(std::to_string(bits));
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * w;
    return std::sqrt(s);
}

double SparseVector::at(int index) const {
    const auto it = std::lower_bound(
        entries.begin(), entries.end(), index,
        [](const std::pair<int, double>& e, int idx) { return e.first < idx; });
    if (it == entries.end() || it->first != index) return 0.0;
    return it->second;
}

TokenSeq tokenize_code(std::string_view snippet, bool punct_tokens) {
    TokenSeq out;
    std::string word, punct;
    auto flush_word = [&] {
        if (word.size() >= 2) out.push_back(word);
        word.clear();
    };
    auto flush_punct = [&] {
        if (punct_tokens && !punct.empty()) out.push_back(punct);
        punct.clear();
    };
    for (const char c : snippet) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            flush_punct();
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            flush_word();
            flush_punct();
        } else {
            flush_word();
            punct.push_back(c);
        }
    }
    flush_word();
    flush_punct();
    return out;
}

Vocabulary fit_vocabulary(const std::vector<TokenSeq>& docs, int min_df, Channel channel) {
    if (docs.empty()) throw ConfigError("fit_vocabulary: no documents");
    if (min_df < 1) throw ConfigError("fit_vocabulary: min_df must be >= 1");
    std::map<std::string, int> df;
    std::set<std::string_view> seen;
    for (const auto& doc : docs) {
        seen.clear();
        for (const auto& tok : doc)
            if (seen.insert(tok).second) df[tok]++;
    }
    Vocabulary vocab;
    vocab.channel = channel;
    vocab.n_docs = docs.size();
    vocab.min_df = min_df;
    for (const auto& [term, count] : df) {
        if (count >= min_df) {
            vocab.terms.push_back(term);  // std::map iterates alphabetically
            vocab.doc_freq.push_back(count);
        }
    }
    if (vocab.terms.empty())
        throw EmptyVocabulary("no term reaches min_df=" + std::to_string(min_df) + " over " +
                              std::to_string(docs.size()) + " documents");
    vocab.idf.resize(vocab.terms.size());
    const double n = static_cast<double>(vocab.n_docs);
    for (std::size_t i = 0; i < vocab.terms.size(); ++i)
        vocab.idf[i] = std::log((1.0 + n) / (1.0 + vocab.doc_freq[i])) + 1.0;
    return vocab;
}

SparseVector vectorize(const TokenSeq& doc, const Vocabulary& vocab) {
    if (vocab.size() == 0) throw EmptyVocabulary("vectorize: empty vocabulary");
    std::map<int, int> counts;
    for (const auto& tok : doc) {
        const int idx = vocab.index_of(tok);
        if (idx >= 0) counts[idx]++;
    }
    SparseVector vec;
    vec.dim = static_cast<int>(vocab.size());
    vec.entries.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [idx, count] : counts) {
        const double w = count * vocab.idf[static_cast<std::size_t>(idx)];
        vec.entries.emplace_back(idx, w);
        norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [idx, w] : vec.entries) w *= inv;
    }
    return vec;
}

SparseVector combine_channels(const SparseVector& text_vec, const SparseVector& code_vec) {
    SparseVector out;
    out.dim = text_vec.dim + code_vec.dim;
    out.entries.reserve(text_vec.entries.size() + code_vec.entries.size());
    out.entries = text_vec.entries;
    for (const auto& [idx, w] : code_vec.entries) out.entries.emplace_back(idx + text_vec.dim, w);
    return out;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path,
                     const nlohmann::json& extra) {
    json terms = json::array();
    for (std::size_t i = 0; i < vocab.size(); ++i)
        terms.push_back({{"term", vocab.terms[i]}, {"df", vocab.doc_freq[i]}, {"idf", vocab.idf[i]}});
    json doc = {{"channel", std::string(channel_name(vocab.channel))},
                {"n_docs", vocab.n_docs},
                {"min_df", vocab.min_df},
                {"terms", terms}};
    for (const auto& [key, value] : extra.items()) doc[key] = value;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary: " + path);
    out << doc.dump(2) << '\n';
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("vocabulary " + path + ": " + e.what());
    }
    Vocabulary vocab;
    vocab.channel = channel_from_name(doc.at("channel").get<std::string>());
    vocab.n_docs = doc.at("n_docs").get<std::size_t>();
    vocab.min_df = doc.at("min_df").get<int>();
    for (const auto& t : doc.at("terms")) {
        vocab.terms.push_back(t.at("term").get<std::string>());
        vocab.doc_freq.push_back(t.at("df").get<int>());
        vocab.idf.push_back(t.at("idf").get<double>());
    }
    if (!std::is_sorted(vocab.terms.begin(), vocab.terms.end()))
        throw DataError("vocabulary " + path + ": terms are not sorted");
    return vocab;
}

void save_matrix(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write matrix: " + path);
    std::size_t nnz = 0;
    for (const auto& row : m.rows) nnz += row.entries.size();
    out << m.rows.size() << ' ' << m.dim << ' ' << nnz << '\n';
    char buf[32];
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        for (const auto& [c, w] : m.rows[r].entries) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), w);
            out << r << ' ' << c << ' ' << std::string_view(buf, res.ptr) << '\n';
        }
    }
}

FeatureMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open matrix: " + path);
    std::size_t rows = 0, nnz = 0;
    int dim = 0;
    if (!(in >> rows >> dim >> nnz)) throw DataError("matrix " + path + ": bad header");
    FeatureMatrix m;
    m.dim = dim;
    m.rows.assign(rows, SparseVector{{}, dim});
    for (std::size_t i = 0; i < nnz; ++i) {
        std::size_t r = 0;
        int c = 0;
        double w = 0.0;
        if (!(in >> r >> c >> w)) throw DataError("matrix " + path + ": truncated at entry " +
                                                  std::to_string(i));
        if (r >= rows || c >= dim) throw DataError("matrix " + path + ": entry out of range");
        m.rows[r].entries.emplace_back(c, w);
    }
    for (auto& row : m.rows)
        std::sort(row.entries.begin(), row.entries.end());
    return m;
}

}  // namespace polyglot
