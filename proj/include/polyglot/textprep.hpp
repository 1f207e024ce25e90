#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace polyglot {

using TokenSeq = std::vector<std::string>;

struct PipelineConfig {
    bool strip_non_alphanumeric = true;
    bool remove_stopwords = true;
    bool retain_entities = true;
    bool stem = true;
    int min_token_len = 2;
    std::set<std::string> stopword_list;
};

// Cleans raw text into the token sequence the vectorizer consumes. Applied
// in order: entity detection on the raw tokens (identifier-shaped tokens are
// kept verbatim, lowercased, and exempt from stemming and the length floor),
// non-alphanumeric stripping, lowercasing, stop-word removal, stemming.
// Standalone digit runs are dropped as part of the stripping step.
TokenSeq preprocess_text(std::string_view text, const PipelineConfig& config);

// True when a whitespace-delimited chunk looks like a code identifier:
// snake_case, dotted path, camelCase, or a digit adjacent to a letter.
// `core` must already be trimmed of surrounding punctuation.
bool is_entity_token(std::string_view core);

// Strips characters outside [A-Za-z0-9_] from both ends, then any leading or
// trailing dots; what remains is the entity-candidate core.
std::string_view entity_core(std::string_view chunk);

// One lowercase word per line; '#'-prefixed lines and blanks are skipped.
std::set<std::string> load_stopwords(const std::string& path);

}  // namespace polyglot
