#pragma once

#include "blocktrace/error.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blocktrace::srcmodel {

enum class TokenKind { identifier, keyword, literal, op };

struct Token {
    TokenKind kind{TokenKind::op};
    std::string text;
    int line{1};
    int column{1};

    bool is(std::string_view t) const noexcept { return text == t; }
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column, std::string path = {});
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& path() const noexcept { return path_; }
    /// Message without the location prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    int line_;
    int column_;
    std::string path_;
};

/// Splits Java source into tokens, dropping whitespace and comments.
/// `>` is never merged with a following `>` so nested generics stay intact.
std::vector<Token> tokenize(std::string_view source);

bool is_java_keyword(std::string_view word);
bool is_primitive_type(std::string_view word);

/// Tokens joined by single spaces.
std::string join_tokens(const std::vector<Token>& tokens, std::size_t begin, std::size_t end);

/// Comment- and whitespace-insensitive rendering of a whole file.
std::string normalize_source(std::string_view source);

/// Same as normalize_source but drops package-independent import declarations,
/// so two files differing only in imports or comments normalize equally.
std::string normalize_without_imports(std::string_view source);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

std::string hex64(std::uint64_t value);

}  // namespace blocktrace::srcmodel
