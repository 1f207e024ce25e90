#pragma once

#include <stdexcept>
#include <string>

namespace polyglot {

// Base error carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error("data", msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error("dimension_mismatch", msg) {}
};

struct EmptyVocabulary : Error {
    explicit EmptyVocabulary(const std::string& msg) : Error("empty_vocabulary", msg) {}
};

struct TruncatedStream : Error {
    explicit TruncatedStream(const std::string& msg) : Error("truncated_stream", msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io", msg) {}
};

}  // namespace polyglot
