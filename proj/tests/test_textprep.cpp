#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "polyglot/textprep.hpp"
#include "polyglot/util/errors.hpp"
#include "polyglot/util/rng.hpp"

using namespace polyglot;

namespace {

PipelineConfig config_with_stopwords() {
    PipelineConfig c;
    c.stopword_list = {"after", "about", "all", "and", "from", "the", "a", "is", "can"};
    return c;
}

}  // namespace

TEST_CASE("empty input yields empty output") {
    CHECK(preprocess_text("", config_with_stopwords()).empty());
    CHECK(preprocess_text("   \t\n ", config_with_stopwords()).empty());
}

TEST_CASE("stop words are removed") {
    const auto tokens = preprocess_text("after about all and from", config_with_stopwords());
    CHECK(tokens.empty());
}

TEST_CASE("word forms collapse to one stem") {
    const auto tokens = preprocess_text("study studies studied", config_with_stopwords());
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "studi");
    CHECK(tokens[1] == "studi");
    CHECK(tokens[2] == "studi");
}

TEST_CASE("all flags off with min length 1 is lowercase whitespace tokenization") {
    PipelineConfig c;
    c.strip_non_alphanumeric = false;
    c.remove_stopwords = false;
    c.retain_entities = false;
    c.stem = false;
    c.min_token_len = 1;
    const auto tokens = preprocess_text("The Quick 123 brown-Fox!", c);
    const TokenSeq expected = {"the", "quick", "123", "brown-fox!"};
    CHECK(tokens == expected);
}

TEST_CASE("punctuation splits tokens and digit runs are dropped") {
    auto c = config_with_stopwords();
    c.retain_entities = false;
    c.stem = false;
    const auto tokens = preprocess_text("hello, world! 123 45 foo", c);
    const TokenSeq expected = {"hello", "world", "foo"};
    CHECK(tokens == expected);
}

TEST_CASE("identifier-shaped tokens are protected from stemming and length") {
    auto c = config_with_stopwords();
    SUBCASE("snake case") {
        const auto tokens = preprocess_text("calling foo_bar today", c);
        REQUIRE(tokens.size() == 3);
        CHECK(tokens[1] == "foo_bar");
    }
    SUBCASE("camel case is lowercased but not stemmed") {
        const auto tokens = preprocess_text("use getValues here", c);
        REQUIRE(tokens.size() == 3);
        CHECK(tokens[1] == "getvalues");
    }
    SUBCASE("dotted path") {
        const auto tokens = preprocess_text("import java.io please", c);
        REQUIRE(tokens.size() == 3);
        CHECK(tokens[1] == "java.io");
    }
    SUBCASE("digit adjacent to letter") {
        const auto tokens = preprocess_text("python3 rocks", c);
        REQUIRE(tokens.size() == 2);
        CHECK(tokens[0] == "python3");
    }
    SUBCASE("trailing punctuation is trimmed before the shape test") {
        const auto tokens = preprocess_text("see foo_bar, then", c);
        REQUIRE(!tokens.empty());
        CHECK(tokens[1] == "foo_bar");
    }
    SUBCASE("plain capitalized words are not entities") {
        const auto tokens = preprocess_text("Hello Stemming", c);
        const TokenSeq expected = {"hello", "stem"};
        CHECK(tokens == expected);
    }
}

TEST_CASE("entity retention off sends identifiers through the normal path") {
    auto c = config_with_stopwords();
    c.retain_entities = false;
    const auto tokens = preprocess_text("foo_bar", c);
    const TokenSeq expected = {"foo", "bar"};
    CHECK(tokens == expected);
}

TEST_CASE("preprocess_text is pure") {
    const auto c = config_with_stopwords();
    const std::string text = "Repeated calls with the SAME input_text.value 42 produce-results";
    CHECK(preprocess_text(text, c) == preprocess_text(text, c));
}

TEST_CASE("output never contains a stop word") {
    auto c = config_with_stopwords();
    // "cans" stems to the stop word "can"
    c.stopword_list.insert("can");
    Rng rng(99);
    const std::vector<std::string> words = {"after", "cans",  "study",   "all",   "parser",
                                            "from",  "the",   "running", "codes", "and",
                                            "about", "files", "is",      "a",     "tokens"};
    for (int round = 0; round < 200; ++round) {
        std::string text;
        const int len = 1 + rng.below_int(12);
        for (int i = 0; i < len; ++i) {
            if (!text.empty()) text += ' ';
            text += words[static_cast<std::size_t>(rng.below_int(static_cast<int>(words.size())))];
        }
        for (const auto& tok : preprocess_text(text, c)) {
            CAPTURE(text);
            CAPTURE(tok);
            CHECK(c.stopword_list.count(tok) == 0);
        }
    }
}

TEST_CASE("degenerate configs are rejected") {
    PipelineConfig no_list;
    no_list.remove_stopwords = true;  // but stopword_list stays empty
    CHECK_THROWS_AS(preprocess_text("hello", no_list), ConfigError);
    auto bad_len = config_with_stopwords();
    bad_len.min_token_len = 0;
    CHECK_THROWS_AS(preprocess_text("hello", bad_len), ConfigError);
}

TEST_CASE("load_stopwords reads one word per line") {
    const std::string path = "test_stopwords_tmp.txt";
    {
        std::ofstream out(path);
        out << "# comment\nAfter\nabout\n\nall\n";
    }
    const auto words = load_stopwords(path);
    CHECK(words == std::set<std::string>{"after", "about", "all"});
    std::remove(path.c_str());
}
