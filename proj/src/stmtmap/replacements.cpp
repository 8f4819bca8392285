#include "blocktrace/stmtmap.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace blocktrace::stmtmap {

using srcmodel::Token;
using srcmodel::TokenKind;

std::string to_string(ReplacementKind kind) {
    switch (kind) {
        case ReplacementKind::identifier: return "identifier";
        case ReplacementKind::literal: return "literal";
        case ReplacementKind::type: return "type";
        case ReplacementKind::method_call: return "method-call";
        case ReplacementKind::expression: return "expression";
    }
    return "expression";
}

namespace {

const std::unordered_set<std::string_view> kLeadingKeywords = {"return", "throw", "break", "continue",
                                                                "yield",  "assert", "case", "default"};

bool upper_initial(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

ReplacementKind classify(const std::vector<Token>& a, std::size_t ab, std::size_t ae, const std::vector<Token>& b,
                         std::size_t bb, std::size_t be, const Token* prev, const Token* next) {
    if (ae - ab == 1 && be - bb == 1) {
        const Token& x = a[ab];
        const Token& y = b[bb];
        if (x.kind == TokenKind::literal && y.kind == TokenKind::literal) return ReplacementKind::literal;
        if (srcmodel::is_primitive_type(x.text) || srcmodel::is_primitive_type(y.text)) return ReplacementKind::type;
        if (x.kind == TokenKind::identifier && y.kind == TokenKind::identifier) {
            if (next && next->is("(")) return ReplacementKind::method_call;
            bool type_slot = (prev && (prev->is("new") || prev->is("<") || prev->is("instanceof"))) ||
                             (next && (next->kind == TokenKind::identifier || next->is("<") || next->is("...") ||
                                       next->is(">") || next->is("::")));
            if (type_slot || (upper_initial(x.text) && upper_initial(y.text))) return ReplacementKind::type;
            return ReplacementKind::identifier;
        }
        return ReplacementKind::expression;
    }
    auto has_paren = [](const std::vector<Token>& t, std::size_t s, std::size_t e) {
        for (std::size_t k = s; k < e; ++k) {
            if (t[k].is("(")) return true;
        }
        return false;
    };
    if (has_paren(a, ab, ae) || has_paren(b, bb, be)) return ReplacementKind::method_call;
    return ReplacementKind::expression;
}

void add_unique(std::vector<Replacement>& out, Replacement r) {
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(std::move(r));
}

}  // namespace

std::optional<std::vector<Replacement>> token_replacements(const std::vector<Token>& a, const std::vector<Token>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<Replacement> out;
    if (n == 0 && m == 0) return out;
    const std::size_t longest = std::max(n, m);
    if (2 * std::min(n, m) < longest) return std::nullopt;
    if (n && m && a[0].text != b[0].text &&
        (kLeadingKeywords.count(a[0].text) || kLeadingKeywords.count(b[0].text))) {
        return std::nullopt;
    }

    // Suffix LCS table.
    std::vector<std::uint16_t> dp((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint16_t& { return dp[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (a[i].text == b[j].text) at(i, j) = static_cast<std::uint16_t>(at(i + 1, j + 1) + 1);
            else at(i, j) = std::max(at(i + 1, j), at(i, j + 1));
        }
    }
    const std::size_t lcs = at(0, 0);
    if (2 * lcs < longest) return std::nullopt;

    std::vector<std::pair<std::size_t, std::size_t>> anchors;
    for (std::size_t i = 0, j = 0; i < n && j < m;) {
        if (a[i].text == b[j].text && at(i, j) == at(i + 1, j + 1) + 1) {
            anchors.emplace_back(i, j);
            ++i;
            ++j;
        } else if (at(i + 1, j) >= at(i, j + 1)) {
            ++i;
        } else {
            ++j;
        }
    }
    bool word_anchor = false;
    for (auto [i, j] : anchors) {
        if (a[i].kind != TokenKind::op) word_anchor = true;
    }

    struct Gap {
        std::size_t ab, ae, bb, be;
    };
    std::vector<Gap> gaps;
    std::size_t pa = 0, pb = 0;
    for (std::size_t k = 0; k <= anchors.size(); ++k) {
        std::size_t ca = k < anchors.size() ? anchors[k].first : n;
        std::size_t cb = k < anchors.size() ? anchors[k].second : m;
        if (ca > pa || cb > pb) gaps.push_back({pa, ca, pb, cb});
        pa = ca + 1;
        pb = cb + 1;
    }
    if (!word_anchor) {
        if (gaps.size() != 1) return std::nullopt;
        const auto& g = gaps.front();
        if (g.ae - g.ab != 1 || g.be - g.bb != 1) return std::nullopt;
        if (a[g.ab].kind == TokenKind::keyword && b[g.bb].kind == TokenKind::keyword &&
            !(srcmodel::is_primitive_type(a[g.ab].text) && srcmodel::is_primitive_type(b[g.bb].text))) {
            return std::nullopt;
        }
    }
    for (const auto& g : gaps) {
        const Token* prev = g.ab > 0 ? &a[g.ab - 1] : nullptr;
        const Token* next = g.ae < n ? &a[g.ae] : nullptr;
        Replacement r;
        r.before = srcmodel::join_tokens(a, g.ab, g.ae);
        r.after = srcmodel::join_tokens(b, g.bb, g.be);
        r.kind = classify(a, g.ab, g.ae, b, g.bb, g.be, prev, next);
        add_unique(out, std::move(r));
    }
    return out;
}

std::optional<std::vector<Replacement>> leaf_replacements(const StatementNode& l, const StatementNode& r) {
    if (!l.is_leaf() || !r.is_leaf()) return std::nullopt;
    if (l.is_case_label != r.is_case_label) return std::nullopt;
    if (l.text == r.text) return std::vector<Replacement>{};
    return token_replacements(l.tokens, r.tokens);
}

std::vector<Replacement> expression_replacements(const StatementNode& l, const StatementNode& r) {
    std::vector<Replacement> out;
    const std::size_t n = std::max(l.expressions.size(), r.expressions.size());
    for (std::size_t i = 0; i < n; ++i) {
        const bool has_l = i < l.expressions.size();
        const bool has_r = i < r.expressions.size();
        if (has_l && has_r && l.expressions[i] == r.expressions[i]) continue;
        if (has_l && has_r) {
            if (auto reps = token_replacements(l.expression_tokens[i], r.expression_tokens[i])) {
                for (auto& rep : *reps) add_unique(out, std::move(rep));
                continue;
            }
        }
        add_unique(out, Replacement{has_l ? l.expressions[i] : std::string(), has_r ? r.expressions[i] : std::string(),
                                    ReplacementKind::expression});
    }
    return out;
}

}  // namespace blocktrace::stmtmap
