#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace notefeat {

enum class ParseErrorKind : std::uint8_t {
    io = 0,
    malformed_header,
    malformed_event,
    unsupported_construct,
    encoding,
};

inline const char* to_string(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::io: return "io";
        case ParseErrorKind::malformed_header: return "malformed_header";
        case ParseErrorKind::malformed_event: return "malformed_event";
        case ParseErrorKind::unsupported_construct: return "unsupported_construct";
        case ParseErrorKind::encoding: return "encoding";
    }
    return "?";
}

// Per-file parse failure. Only kind == io is worth retrying.
struct ParseError {
    std::string path;
    ParseErrorKind kind = ParseErrorKind::io;
    std::string detail;
    std::optional<std::int64_t> byte_or_line;

    std::string message() const {
        std::string m = path;
        m += ": ";
        m += to_string(kind);
        if (!detail.empty()) { m += ": "; m += detail; }
        if (byte_or_line) { m += " @"; m += std::to_string(*byte_or_line); }
        return m;
    }
};

// Minimal expected-style result: either a value or a ParseError.
template <typename T>
class ParseResult {
public:
    ParseResult(T value) : data_(std::move(value)) {}
    ParseResult(ParseError err) : data_(std::move(err)) {}

    bool ok() const { return std::holds_alternative<T>(data_); }
    explicit operator bool() const { return ok(); }

    T& value() { return std::get<T>(data_); }
    const T& value() const { return std::get<T>(data_); }
    ParseError& error() { return std::get<ParseError>(data_); }
    const ParseError& error() const { return std::get<ParseError>(data_); }

private:
    std::variant<T, ParseError> data_;
};

} // namespace notefeat
