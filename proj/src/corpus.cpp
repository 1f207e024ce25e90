#include "polyglot/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"
#include "polyglot/util/text.hpp"

namespace polyglot {

using nlohmann::json;

void Corpus::recount() {
    counts.clear();
    for (const auto& q : questions) counts[q.label]++;
}

namespace {

// Case-insensitive check that markup at `pos` starts tag `name` (either
// "<name>"-style with attributes or exactly the closing form given).
bool tag_starts_at(std::string_view markup, std::size_t pos, std::string_view name) {
    if (pos + name.size() > markup.size()) return false;
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(markup[pos + i])) !=
            std::tolower(static_cast<unsigned char>(name[i])))
            return false;
    }
    return true;
}

std::size_t find_tag(std::string_view markup, std::string_view open, std::size_t from) {
    for (std::size_t i = from; i + open.size() <= markup.size(); ++i) {
        if (markup[i] == '<' && tag_starts_at(markup, i, open)) {
            // the name must end the tag or be followed by whitespace/attrs or '>'
            const std::size_t after = i + open.size();
            if (after >= markup.size()) return std::string_view::npos;
            const char c = markup[after];
            if (c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c)))
                return i;
        }
    }
    return std::string_view::npos;
}

std::size_t skip_past_tag_close(std::string_view markup, std::size_t tag_start) {
    const std::size_t gt = markup.find('>', tag_start);
    return gt == std::string_view::npos ? markup.size() : gt + 1;
}

struct CodeBlock {
    std::size_t begin;  // region of the whole <pre>...</pre> span
    std::size_t end;
    std::string text;   // decoded inner text of the nested <code> element(s)
};

// Block-level code are <code> elements nested inside <pre>. Inline <code>
// outside <pre> stays with the body text.
std::vector<CodeBlock> find_code_blocks(std::string_view markup) {
    std::vector<CodeBlock> blocks;
    std::size_t pos = 0;
    while (true) {
        const std::size_t pre = find_tag(markup, "<pre", pos);
        if (pre == std::string_view::npos) break;
        const std::size_t pre_inner = skip_past_tag_close(markup, pre);
        std::size_t pre_end = find_tag(markup, "</pre", pre_inner);
        std::size_t region_end;
        if (pre_end == std::string_view::npos) {
            pre_end = markup.size();
            region_end = markup.size();
        } else {
            region_end = skip_past_tag_close(markup, pre_end);
        }
        std::string text;
        std::size_t cpos = pre_inner;
        while (true) {
            const std::size_t code = find_tag(markup, "<code", cpos);
            if (code == std::string_view::npos || code >= pre_end) break;
            const std::size_t code_inner = skip_past_tag_close(markup, code);
            std::size_t code_end = find_tag(markup, "</code", code_inner);
            if (code_end == std::string_view::npos || code_end > pre_end) code_end = pre_end;
            if (!text.empty()) text += '\n';
            text += decode_entities(markup.substr(code_inner, code_end - code_inner));
            cpos = skip_past_tag_close(markup, code_end);
        }
        if (!text.empty()) blocks.push_back({pre, region_end, std::move(text)});
        pos = region_end;
    }
    return blocks;
}

std::string strip_markup_to_text(std::string_view markup) {
    std::string out;
    out.reserve(markup.size());
    std::size_t i = 0;
    while (i < markup.size()) {
        if (markup[i] == '<') {
            const std::size_t gt = markup.find('>', i);
            if (gt == std::string_view::npos) break;
            i = gt + 1;
            out.push_back(' ');
        } else {
            out.push_back(markup[i++]);
        }
    }
    return collapse_whitespace(decode_entities(out));
}

std::vector<std::string> parse_tags(std::string_view raw) {
    std::vector<std::string> tags;
    std::set<std::string> seen;
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] == '<') {
            const std::size_t gt = raw.find('>', i);
            if (gt == std::string_view::npos) break;
            std::string tag = to_lower(raw.substr(i + 1, gt - i - 1));
            if (!tag.empty() && seen.insert(tag).second) tags.push_back(std::move(tag));
            i = gt + 1;
        } else {
            i++;
        }
    }
    return tags;
}

// Attribute scan over the inside of a row element. Returns false on
// malformed attribute syntax.
bool parse_attributes(std::string_view row, std::map<std::string, std::string>& attrs,
                      std::string& error) {
    std::size_t i = 0;
    while (i < row.size()) {
        while (i < row.size() && std::isspace(static_cast<unsigned char>(row[i]))) i++;
        if (i >= row.size()) break;
        const std::size_t name_start = i;
        while (i < row.size() && (std::isalnum(static_cast<unsigned char>(row[i])) || row[i] == '_'))
            i++;
        if (i == name_start) {
            error = "unexpected character in attribute list";
            return false;
        }
        const std::string name(row.substr(name_start, i - name_start));
        while (i < row.size() && std::isspace(static_cast<unsigned char>(row[i]))) i++;
        if (i >= row.size() || row[i] != '=') {
            error = "attribute '" + name + "' missing '='";
            return false;
        }
        i++;
        while (i < row.size() && std::isspace(static_cast<unsigned char>(row[i]))) i++;
        if (i >= row.size() || row[i] != '"') {
            error = "attribute '" + name + "' missing opening quote";
            return false;
        }
        i++;
        const std::size_t val_start = i;
        while (i < row.size() && row[i] != '"') i++;
        if (i >= row.size()) {
            error = "attribute '" + name + "' missing closing quote";
            return false;
        }
        attrs[name] = std::string(row.substr(val_start, i - val_start));
        i++;
    }
    return true;
}

}  // namespace

std::optional<PostStream::Item> PostStream::next() {
    std::string buf;
    while (true) {
        // scan forward to the next "<row"
        int c;
        bool in_row = false;
        bool in_quotes = false;
        std::size_t row_offset = 0;
        buf.clear();
        while ((c = in_.get()) != EOF) {
            offset_++;
            if (!in_row) {
                if (c == '<') {
                    buf = "<";
                    row_offset = offset_ - 1;
                } else if (!buf.empty()) {
                    buf.push_back(static_cast<char>(c));
                    if (buf.size() <= 4) {
                        if (buf != std::string("<row").substr(0, buf.size())) buf.clear();
                    } else if (std::isspace(static_cast<unsigned char>(c)) || c == '/') {
                        in_row = true;
                    } else {
                        buf.clear();  // some other element, e.g. <rows>
                    }
                }
                continue;
            }
            buf.push_back(static_cast<char>(c));
            peak_buffer_ = std::max(peak_buffer_, buf.size());
            if (c == '"') in_quotes = !in_quotes;
            if (in_quotes) continue;
            if (buf.size() >= 2 && buf[buf.size() - 2] == '/' && buf.back() == '>') break;
            if (buf.back() == '>') {
                // a row must be self-closing
                return Item(RowError{row_offset, "row element is not self-closing"});
            }
        }
        if (c == EOF) {
            if (in_row || !buf.empty())
                throw TruncatedStream("input ended inside a row element at offset " +
                                      std::to_string(row_offset));
            return std::nullopt;
        }

        // buf = "<row ... />"
        const std::string_view inner(buf.data() + 4, buf.size() - 6);
        std::map<std::string, std::string> attrs;
        std::string err;
        if (!parse_attributes(inner, attrs, err)) return Item(RowError{row_offset, err});

        const auto id_it = attrs.find("Id");
        const auto type_it = attrs.find("PostTypeId");
        if (id_it == attrs.end()) return Item(RowError{row_offset, "missing attribute: Id"});
        if (type_it == attrs.end())
            return Item(RowError{row_offset, "missing attribute: PostTypeId"});
        int post_type = 0;
        std::int64_t id = 0;
        try {
            id = std::stoll(id_it->second);
            post_type = std::stoi(type_it->second);
        } catch (const std::exception&) {
            return Item(RowError{row_offset, "non-numeric Id or PostTypeId"});
        }
        if (post_type != 1) continue;  // answers, wikis, ... are skipped

        for (const char* required : {"Title", "Body", "Tags"}) {
            if (attrs.find(required) == attrs.end())
                return Item(RowError{row_offset, std::string("missing attribute: ") + required});
        }
        RawPost post;
        post.id = id;
        post.post_type = post_type;
        post.title = decode_entities(attrs["Title"]);
        post.body_markup = decode_entities(attrs["Body"]);
        post.tags = parse_tags(decode_entities(attrs["Tags"]));
        return Item(std::move(post));
    }
}

TagMap default_tag_map() {
    TagMap map;
    for (int i = 0; i < kLanguageCount; ++i)
        map[std::string(kLanguageNames[i])] = static_cast<LanguageId>(i);
    const std::pair<const char*, LanguageId> versioned[] = {
        {"python-2.6", LanguageId::python}, {"python-2.7", LanguageId::python},
        {"python-2.x", LanguageId::python}, {"python-3.3", LanguageId::python},
        {"python-3.5", LanguageId::python}, {"python-3.6", LanguageId::python},
        {"python-3.x", LanguageId::python}, {"java-7", LanguageId::java},
        {"java-8", LanguageId::java},       {"c++03", LanguageId::c_plus_plus},
        {"c++11", LanguageId::c_plus_plus}, {"c++14", LanguageId::c_plus_plus},
        {"c++98", LanguageId::c_plus_plus},
    };
    for (const auto& [tag, lang] : versioned) map[tag] = lang;
    return map;
}

TagMap load_tag_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tag map: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("tag map " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw DataError("tag map must be a JSON object: " + path);
    TagMap map;
    for (const auto& [tag, value] : doc.items()) {
        const auto lang = language_from_name(value.get<std::string>());
        if (!lang) throw DataError("tag map " + path + ": unknown language '" +
                                   value.get<std::string>() + "' for tag '" + tag + "'");
        map[to_lower(tag)] = *lang;
    }
    return map;
}

std::optional<Question> extract_question(const RawPost& post, const TagMap& tag_map,
                                         int min_snippet_chars) {
    std::set<LanguageId> langs;
    for (const auto& tag : post.tags) {
        const auto it = tag_map.find(tag);
        if (it != tag_map.end()) langs.insert(it->second);
    }
    if (langs.size() != 1) return std::nullopt;

    const auto blocks = find_code_blocks(post.body_markup);
    if (blocks.empty()) return std::nullopt;
    std::string snippet;
    for (const auto& b : blocks) {
        if (!snippet.empty()) snippet += '\n';
        snippet += b.text;
    }
    if (static_cast<int>(snippet.size()) < min_snippet_chars) return std::nullopt;

    std::string residue;
    residue.reserve(post.body_markup.size());
    std::size_t pos = 0;
    for (const auto& b : blocks) {
        residue.append(post.body_markup, pos, b.begin - pos);
        residue.push_back(' ');
        pos = b.end;
    }
    residue.append(post.body_markup, pos, post.body_markup.size() - pos);

    Question q;
    q.id = post.id;
    q.title = collapse_whitespace(post.title);
    q.body_text = strip_markup_to_text(residue);
    q.snippet = std::move(snippet);
    q.label = *langs.begin();
    return q;
}

Corpus sample_balanced(const Corpus& corpus, int per_language, std::uint64_t seed) {
    if (per_language < 1) throw ConfigError("per_language must be >= 1");
    std::map<LanguageId, std::vector<std::size_t>> by_lang;
    for (std::size_t i = 0; i < corpus.questions.size(); ++i)
        by_lang[corpus.questions[i].label].push_back(i);

    Corpus out;
    std::vector<std::size_t> selected;
    for (int code = 0; code < kLanguageCount; ++code) {
        const auto lang = static_cast<LanguageId>(code);
        const auto it = by_lang.find(lang);
        if (it == by_lang.end()) {
            out.counts[lang] = 0;  // recorded so callers can warn
            continue;
        }
        const auto& idx = it->second;
        const std::size_t want = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(per_language));
        std::vector<std::size_t> chosen;
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(code)));
        rng.sample_indices(idx.size(), want, std::back_inserter(chosen));
        for (const std::size_t c : chosen) selected.push_back(idx[c]);
        out.counts[lang] = want;
    }
    // emit in original document order, which also preserves relative order
    // within each language
    std::sort(selected.begin(), selected.end());
    out.questions.reserve(selected.size());
    for (const std::size_t g : selected) out.questions.push_back(corpus.questions[g]);
    return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus: " + path);
    for (const auto& q : corpus.questions) {
        json line = {{"id", q.id},
                     {"title", q.title},
                     {"body_text", q.body_text},
                     {"snippet", q.snippet},
                     {"label", std::string(language_name(q.label))}};
        out << line.dump() << '\n';
    }
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus: " + path);
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Question q;
        q.id = doc.at("id").get<std::int64_t>();
        q.title = doc.at("title").get<std::string>();
        q.body_text = doc.at("body_text").get<std::string>();
        q.snippet = doc.at("snippet").get<std::string>();
        const std::string label = doc.at("label").get<std::string>();
        const auto lang = language_from_name(label);
        if (!lang)
            throw DataError(path + ":" + std::to_string(lineno) + ": unknown label '" + label + "'");
        q.label = *lang;
        corpus.questions.push_back(std::move(q));
    }
    corpus.recount();
    return corpus;
}

}  // namespace polyglot
