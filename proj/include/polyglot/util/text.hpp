#pragma once

#include <string>
#include <string_view>

namespace polyglot {

// Decodes the named XML/HTML entities (&lt; &gt; &amp; &quot; &apos; &nbsp;)
// and numeric references (&#NN; &#xHH;, emitted as UTF-8). Unknown entities
// are left verbatim.
std::string decode_entities(std::string_view in);

// Collapses runs of whitespace (space, tab, CR, LF) to single spaces and
// trims the ends.
std::string collapse_whitespace(std::string_view in);

std::string to_lower(std::string_view in);

}  // namespace polyglot
