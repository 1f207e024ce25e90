#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polyglot/languages.hpp"

namespace polyglot {

// One dump row of question type, entity-decoded. body_markup still carries
// its HTML tags; title and tags are plain.
struct RawPost {
    std::int64_t id = 0;
    int post_type = 0;
    std::string title;
    std::string body_markup;
    std::vector<std::string> tags;  // lowercase, duplicates removed
};

struct Question {
    std::int64_t id = 0;
    std::string title;
    std::string body_text;  // markup stripped, code blocks removed
    std::string snippet;    // all code blocks joined with '\n'
    LanguageId label = LanguageId::assembly;
};

struct Corpus {
    std::vector<Question> questions;
    std::map<LanguageId, std::size_t> counts;

    void recount();
};

// Streaming reader over a dump of self-closing <row .../> elements with
// attributes Id, PostTypeId, Title, Body, Tags. Yields question rows only;
// malformed rows come back as RowError so the caller can skip or abort.
// A row left open at end of input throws TruncatedStream.
class PostStream {
public:
    struct RowError {
        std::size_t offset = 0;  // byte offset of the row start
        std::string message;
    };
    using Item = std::variant<RawPost, RowError>;

    explicit PostStream(std::istream& in) : in_(in) {}

    // nullopt on clean end of stream
    std::optional<Item> next();

    // Largest internal row buffer seen; grows with row size, not file size.
    std::size_t peak_buffer_bytes() const { return peak_buffer_; }

private:
    std::istream& in_;
    std::size_t offset_ = 0;
    std::size_t peak_buffer_ = 0;
};

using TagMap = std::map<std::string, LanguageId>;

// JSON object file mapping tag -> canonical language name.
TagMap load_tag_map(const std::string& path);

// Built-in map covering the 24 base tags plus the common version tags
// (python-2.6..3.6, java-7/8, c++98/03/11/14 and friends).
TagMap default_tag_map();

// Applies the filtering rules: exactly one language among the tags, at
// least one block-level code region, merged snippet length >= the floor.
// Returns nullopt when any rule rejects the post.
std::optional<Question> extract_question(const RawPost& post, const TagMap& tag_map,
                                         int min_snippet_chars);

// Per language, keeps min(per_language, available) questions sampled without
// replacement, preserving relative order; deterministic under seed. Languages
// with zero samples stay in counts with a zero entry.
Corpus sample_balanced(const Corpus& corpus, int per_language, std::uint64_t seed);

// JSON-lines corpus file: {id, title, body_text, snippet, label} per line.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

}  // namespace polyglot
