#include "polyglot/textprep.hpp"

#include <cctype>
#include <fstream>

#include "polyglot/porter.hpp"
#include "polyglot/util/errors.hpp"
#include "polyglot/util/text.hpp"

namespace polyglot {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (const char c : s)
        if (!is_digit(c)) return false;
    return true;
}

}  // namespace

std::string_view entity_core(std::string_view chunk) {
    std::size_t lo = 0;
    std::size_t hi = chunk.size();
    while (lo < hi && !is_word_char(chunk[lo])) lo++;
    while (hi > lo && !is_word_char(chunk[hi - 1])) hi--;
    auto core = chunk.substr(lo, hi - lo);
    while (!core.empty() && core.front() == '.') core.remove_prefix(1);
    while (!core.empty() && core.back() == '.') core.remove_suffix(1);
    return core;
}

bool is_entity_token(std::string_view core) {
    if (core.size() < 2) return false;
    bool has_alnum = false;
    for (const char c : core) {
        if (!is_word_char(c) && c != '.') return false;
        if (std::isalnum(static_cast<unsigned char>(c))) has_alnum = true;
    }
    if (!has_alnum) return false;
    for (std::size_t i = 0; i < core.size(); ++i) {
        const char c = core[i];
        if (c == '_') return true;
        if (i + 1 < core.size()) {
            const char n = core[i + 1];
            if (c == '.' && std::isalnum(static_cast<unsigned char>(n)) && i > 0 &&
                std::isalnum(static_cast<unsigned char>(core[i - 1])))
                return true;
            if ((is_digit(c) && is_alpha(n)) || (is_alpha(c) && is_digit(n))) return true;
            if (is_lower(c) && is_upper(n)) return true;
        }
    }
    return false;
}

TokenSeq preprocess_text(std::string_view text, const PipelineConfig& config) {
    if (config.min_token_len < 1) throw ConfigError("min_token_len must be >= 1");
    if (config.remove_stopwords && config.stopword_list.empty())
        throw ConfigError("remove_stopwords is on but the stopword list is empty");
    TokenSeq out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    std::string buf;

    auto emit = [&](std::string token, bool protected_entity) {
        if (token.empty()) return;
        if (config.remove_stopwords && config.stopword_list.count(token) > 0) return;
        if (!protected_entity) {
            if (config.strip_non_alphanumeric && all_digits(token)) return;
            if (config.stem) {
                token = porter_stem(token);
                // a stem may collapse onto a stop word ("cans" -> "can")
                if (config.remove_stopwords && config.stopword_list.count(token) > 0) return;
            }
            if (static_cast<int>(token.size()) < config.min_token_len) return;
        }
        out.push_back(std::move(token));
    };

    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) i++;
        if (i >= n) break;
        const std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) i++;
        const std::string_view chunk = text.substr(start, i - start);

        if (config.retain_entities) {
            const std::string_view core = entity_core(chunk);
            if (is_entity_token(core)) {
                emit(to_lower(core), true);
                continue;
            }
        }
        if (!config.strip_non_alphanumeric) {
            emit(to_lower(chunk), false);
            continue;
        }
        // non-alphanumeric characters act as token separators
        buf.clear();
        for (const char c : chunk) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                buf.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            } else if (!buf.empty()) {
                emit(buf, false);
                buf.clear();
            }
        }
        if (!buf.empty()) emit(buf, false);
    }
    return out;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword list: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(to_lower(line));
    }
    if (words.empty()) throw DataError("stopword list is empty: " + path);
    return words;
}

}  // namespace polyglot
