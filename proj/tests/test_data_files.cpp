#include <doctest.h>

#include <string>

#include "polyglot/corpus.hpp"
#include "polyglot/textprep.hpp"

using namespace polyglot;

namespace {
const std::string kDataDir = POLYGLOT_DATA_DIR;
}

TEST_CASE("the shipped tag map matches the built-in default") {
    const auto shipped = load_tag_map(kDataDir + "/language_tags.json");
    const auto builtin = default_tag_map();
    CHECK(shipped == builtin);
    CHECK(shipped.at("python-3.x") == LanguageId::python);
    CHECK(shipped.at("java-8") == LanguageId::java);
    CHECK(shipped.at("c++11") == LanguageId::c_plus_plus);
    CHECK(shipped.count("sql-server") == 0);  // synonyms are out of scope
}

TEST_CASE("the shipped stop-word list loads and carries the canonical entries") {
    const auto words = load_stopwords(kDataDir + "/stopwords.txt");
    CHECK(words.size() == 176);
    for (const std::string w : {"after", "about", "all", "and", "from"})
        CHECK(words.count(w) == 1);
}
