#pragma once

#include <string>
#include <string_view>

namespace polyglot {

// Porter suffix-stripping stemmer (canonical reference behavior: words of
// length <= 2 pass through, step 2 applies bli->ble and logi->log).
// Input must be lowercase alphabetic; output never exceeds the input length.
std::string porter_stem(std::string_view word);

}  // namespace polyglot
