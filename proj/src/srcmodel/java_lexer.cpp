#include "blocktrace/java_lexer.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace blocktrace::srcmodel {

namespace {

const std::unordered_set<std::string_view> kKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",      "case",       "catch",
    "char",     "class",      "const",     "continue",  "default",   "do",         "double",
    "else",     "enum",       "extends",   "final",     "finally",   "float",      "for",
    "goto",     "if",         "implements", "import",   "instanceof", "int",       "interface",
    "long",     "native",     "new",       "package",   "private",   "protected",  "public",
    "return",   "short",      "static",    "strictfp",  "super",     "switch",     "synchronized",
    "this",     "throw",      "throws",    "transient", "try",       "void",       "volatile",
    "while"};

const std::unordered_set<std::string_view> kPrimitives = {"boolean", "byte", "char",  "short",
                                                           "int",     "long", "float", "double",
                                                           "void"};

// Longest first; '>' is deliberately absent from multi-char operators except ">=".
constexpr std::array<std::string_view, 21> kOperators = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=",  "+=",  "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<"};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column, std::string path)
    : Error((path.empty() ? std::string() : path + ":") + std::to_string(line) + ":" +
            std::to_string(column) + ": " + message),
      message_(message),
      line_(line),
      column_(column),
      path_(std::move(path)) {}

bool is_java_keyword(std::string_view word) { return kKeywords.count(word) != 0; }
bool is_primitive_type(std::string_view word) { return kPrimitives.count(word) != 0; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    std::size_t line_start = 0;
    const std::size_t n = src.size();

    auto advance_newlines = [&](std::size_t from, std::size_t to) {
        for (std::size_t k = from; k < to; ++k) {
            if (src[k] == '\n') {
                ++line;
                line_start = k + 1;
            }
        }
    };

    while (i < n) {
        const auto c = static_cast<unsigned char>(src[i]);
        if (c == '\n') {
            ++line;
            line_start = ++i;
            continue;
        }
        if (std::isspace(c) || c == '\f') {
            ++i;
            continue;
        }
        const int col = static_cast<int>(i - line_start) + 1;
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            auto end = src.find("*/", i + 2);
            if (end == std::string_view::npos) throw ParseError("unterminated comment", line, col);
            advance_newlines(i, end + 2);
            i = end + 2;
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = col;
        const std::size_t start = i;
        if (c == '"' && src.substr(i, 3) == "\"\"\"") {
            std::size_t k = i + 3;
            while (k < n && src.substr(k, 3) != "\"\"\"") k += (src[k] == '\\') ? 2 : 1;
            if (k >= n) throw ParseError("unterminated text block", line, col);
            i = k + 3;
            tok.kind = TokenKind::literal;
            tok.text = std::string(src.substr(start, i - start));
            advance_newlines(start, i);
        } else if (c == '"' || c == '\'') {
            std::size_t k = i + 1;
            while (k < n && src[k] != static_cast<char>(c)) {
                if (src[k] == '\n') throw ParseError("unterminated literal", line, col);
                k += (src[k] == '\\') ? 2 : 1;
            }
            if (k >= n) throw ParseError("unterminated literal", line, col);
            i = k + 1;
            tok.kind = TokenKind::literal;
            tok.text = std::string(src.substr(start, i - start));
        } else if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            const bool hex = c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X');
            std::size_t k = i;
            while (k < n) {
                const auto d = static_cast<unsigned char>(src[k]);
                if (std::isalnum(d) || d == '_') {
                    ++k;
                    const char e = static_cast<char>(d);
                    bool exponent = hex ? (e == 'p' || e == 'P') : (e == 'e' || e == 'E');
                    if (exponent && k < n && (src[k] == '+' || src[k] == '-')) ++k;
                } else if (d == '.' && k + 1 < n && src[k + 1] != '.' &&
                           !ident_start(static_cast<unsigned char>(src[k + 1]))) {
                    ++k;
                } else if (d == '.' && k + 1 < n && (src[k + 1] == 'e' || src[k + 1] == 'E' ||
                                                     src[k + 1] == 'f' || src[k + 1] == 'F' ||
                                                     src[k + 1] == 'd' || src[k + 1] == 'D') &&
                           !hex && (k + 2 >= n || !ident_part(static_cast<unsigned char>(src[k + 2])) ||
                                    src[k + 1] == 'e' || src[k + 1] == 'E')) {
                    ++k;
                } else {
                    break;
                }
            }
            i = k;
            tok.kind = TokenKind::literal;
            tok.text = std::string(src.substr(start, i - start));
        } else if (ident_start(c)) {
            std::size_t k = i + 1;
            while (k < n && ident_part(static_cast<unsigned char>(src[k]))) ++k;
            i = k;
            tok.text = std::string(src.substr(start, i - start));
            if (tok.text == "true" || tok.text == "false" || tok.text == "null") {
                tok.kind = TokenKind::literal;
            } else if (is_java_keyword(tok.text)) {
                tok.kind = TokenKind::keyword;
            } else {
                tok.kind = TokenKind::identifier;
            }
        } else {
            tok.kind = TokenKind::op;
            std::size_t len = 1;
            for (auto op : kOperators) {
                if (src.substr(i, op.size()) == op) {
                    len = op.size();
                    break;
                }
            }
            tok.text = std::string(src.substr(i, len));
            i += len;
        }
        out.push_back(std::move(tok));
    }
    return out;
}

std::string join_tokens(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t k = begin; k < end && k < tokens.size(); ++k) {
        if (k != begin) out.push_back(' ');
        out += tokens[k].text;
    }
    return out;
}

std::string normalize_source(std::string_view source) {
    auto tokens = tokenize(source);
    return join_tokens(tokens, 0, tokens.size());
}

std::string normalize_without_imports(std::string_view source) {
    auto tokens = tokenize(source);
    std::vector<Token> kept;
    kept.reserve(tokens.size());
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        if (tokens[k].is("import")) {
            while (k < tokens.size() && !tokens[k].is(";")) ++k;
            continue;
        }
        kept.push_back(tokens[k]);
    }
    return join_tokens(kept, 0, kept.size());
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace blocktrace::srcmodel
