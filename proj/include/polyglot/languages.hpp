#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace polyglot {

// The 24 supported languages. Codes are stable and alphabetical; they are
// persisted in artifacts, so the order must never change.
enum class LanguageId : int {
    assembly = 0,
    c = 1,
    c_sharp = 2,
    c_plus_plus = 3,
    coffeescript = 4,
    go = 5,
    groovy = 6,
    haskell = 7,
    java = 8,
    javascript = 9,
    lua = 10,
    matlab = 11,
    objective_c = 12,
    perl = 13,
    php = 14,
    python = 15,
    r = 16,
    ruby = 17,
    scala = 18,
    sql = 19,
    swift = 20,
    typescript = 21,
    vb_net = 22,
    vba = 23,
};

inline constexpr int kLanguageCount = 24;

inline constexpr std::array<std::string_view, kLanguageCount> kLanguageNames = {
    "assembly", "c",      "c#",          "c++",    "coffeescript", "go",
    "groovy",   "haskell", "java",       "javascript", "lua",      "matlab",
    "objective-c", "perl", "php",        "python", "r",            "ruby",
    "scala",    "sql",    "swift",       "typescript", "vb.net",   "vba",
};

inline std::string_view language_name(LanguageId id) {
    return kLanguageNames[static_cast<int>(id)];
}

inline std::optional<LanguageId> language_from_name(std::string_view name) {
    for (int i = 0; i < kLanguageCount; ++i) {
        if (kLanguageNames[i] == name) return static_cast<LanguageId>(i);
    }
    return std::nullopt;
}

inline int language_code(LanguageId id) { return static_cast<int>(id); }

}  // namespace polyglot
