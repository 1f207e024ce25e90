#include "polyglot/util/text.hpp"

#include <cctype>
#include <cstdint>

namespace polyglot {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

}  // namespace

std::string decode_entities(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in[i] != '&') {
            out.push_back(in[i++]);
            continue;
        }
        const std::size_t semi = in.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(in[i++]);
            continue;
        }
        const std::string_view name = in.substr(i + 1, semi - i - 1);
        if (name == "lt") {
            out.push_back('<');
        } else if (name == "gt") {
            out.push_back('>');
        } else if (name == "amp") {
            out.push_back('&');
        } else if (name == "quot") {
            out.push_back('"');
        } else if (name == "apos") {
            out.push_back('\'');
        } else if (name == "nbsp") {
            out.push_back(' ');
        } else if (name.size() >= 2 && name[0] == '#') {
            std::uint32_t cp = 0;
            bool ok = true;
            if (name[1] == 'x' || name[1] == 'X') {
                for (std::size_t k = 2; k < name.size(); ++k) {
                    const char c = name[k];
                    if (!std::isxdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                    cp = cp * 16 + static_cast<std::uint32_t>(
                        std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                        : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                }
                ok = ok && name.size() > 2;
            } else {
                for (std::size_t k = 1; k < name.size(); ++k) {
                    if (!std::isdigit(static_cast<unsigned char>(name[k]))) { ok = false; break; }
                    cp = cp * 10 + static_cast<std::uint32_t>(name[k] - '0');
                }
            }
            if (ok && cp > 0 && cp <= 0x10ffff) {
                append_utf8(out, cp);
            } else {
                out.push_back(in[i]);
                ++i;
                continue;
            }
        } else {
            out.push_back(in[i]);
            ++i;
            continue;
        }
        i = semi + 1;
    }
    return out;
}

std::string collapse_whitespace(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    for (const char c : in) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string to_lower(std::string_view in) {
    std::string out(in);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace polyglot
