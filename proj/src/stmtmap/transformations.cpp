#include "blocktrace/stmtmap.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace blocktrace::stmtmap {

using srcmodel::StatementKind;
using srcmodel::Token;
using srcmodel::TokenKind;

std::string BlockTransformation::label() const {
    std::string_view a, b;
    switch (kind) {
        case TransformationKind::if_else_if_to_switch: a = "if-else-if", b = "switch"; break;
        case TransformationKind::if_to_while: a = "if", b = "while"; break;
        case TransformationKind::iterator_while_to_enhanced_for: a = "iterator-while", b = "enhanced-for"; break;
        case TransformationKind::for_to_while: a = "for", b = "while"; break;
        case TransformationKind::for_to_pipeline: a = "for", b = "forEach-pipeline"; break;
        case TransformationKind::for_to_if: a = "for", b = "if"; break;
        case TransformationKind::try_to_try_with_resources: a = "try", b = "try-with-resources"; break;
        case TransformationKind::try_to_synchronized: a = "try", b = "synchronized"; break;
        case TransformationKind::catch_to_finally: a = "catch", b = "finally"; break;
    }
    if (direction == Direction::inverse) std::swap(a, b);
    return std::string(a) + " to " + std::string(b);
}

namespace {

std::vector<const StatementNode*> leaves_below(const StatementNode& n) {
    std::vector<const StatementNode*> out;
    for (const auto* d : n.preorder()) {
        if (d != &n && d->is_leaf()) out.push_back(d);
    }
    return out;
}

}  // namespace

bool bodies_overlap(const StatementNode& l, const StatementNode& r) {
    auto ll = leaves_below(l);
    auto rl = leaves_below(r);
    for (const auto* a : ll) {
        for (const auto* b : rl) {
            if (a->text_hash == b->text_hash && a->text == b->text) return true;
        }
    }
    for (const auto* a : ll) {
        for (const auto* b : rl) {
            if (leaf_replacements(*a, *b)) return true;
        }
    }
    return false;
}

namespace {

std::string join(const std::vector<Token>& t, std::size_t b, std::size_t e) { return srcmodel::join_tokens(t, b, e); }

/// Subject of an equality test: `S == C`, `C == S`, `S.equals(C)`, `C.equals(S)`.
std::optional<std::string> equality_subject(const std::vector<Token>& t) {
    auto is_constant = [](const std::vector<Token>& x, std::size_t b, std::size_t e) {
        if (e - b == 1 && x[b].kind == TokenKind::literal) return true;
        // Qualified or upper-case constant: A.B or CONST
        for (std::size_t k = b; k < e; ++k) {
            if (x[k].kind != TokenKind::identifier && !x[k].is(".")) return false;
        }
        const auto& last = x[e - 1].text;
        return !last.empty() && std::isupper(static_cast<unsigned char>(last[0]));
    };
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k].is("==") && k > 0 && k + 1 < t.size()) {
            if (is_constant(t, k + 1, t.size())) return join(t, 0, k);
            if (is_constant(t, 0, k)) return join(t, k + 1, t.size());
            return std::nullopt;
        }
    }
    // X . equals ( Y )
    if (t.size() >= 6 && t.back().is(")")) {
        for (std::size_t k = 0; k + 2 < t.size(); ++k) {
            if (t[k].is(".") && t[k + 1].is("equals") && t[k + 2].is("(")) {
                std::size_t arg_b = k + 3, arg_e = t.size() - 1;
                if (arg_e <= arg_b) return std::nullopt;
                if (is_constant(t, arg_b, arg_e)) return join(t, 0, k);
                if (is_constant(t, 0, k)) return join(t, arg_b, arg_e);
                return std::nullopt;
            }
        }
    }
    return std::nullopt;
}

bool is_if_ladder_for(const StatementNode& l, const std::string& selector) {
    const StatementNode* node = &l;
    int rungs = 0;
    while (node && node->kind == StatementKind::if_) {
        auto subject = equality_subject(node->expression_tokens.at(0));
        if (!subject) {
            // `a == X || a == Y` style: every disjunct must test the subject.
            const auto& t = node->expression_tokens.at(0);
            std::size_t start = 0;
            bool ok = true;
            for (std::size_t k = 0; k <= t.size(); ++k) {
                if (k == t.size() || t[k].is("||")) {
                    std::vector<Token> part(t.begin() + static_cast<std::ptrdiff_t>(start),
                                            t.begin() + static_cast<std::ptrdiff_t>(k));
                    auto s = equality_subject(part);
                    ok = ok && s && *s == selector;
                    start = k + 1;
                }
            }
            if (!ok) return false;
        } else if (*subject != selector) {
            return false;
        }
        ++rungs;
        const StatementNode* next = nullptr;
        if (node->else_start >= 0 && node->else_start + 1 == static_cast<int>(node->children.size()) &&
            node->children.back().kind == StatementKind::if_) {
            next = &node->children.back();
        }
        node = next;
    }
    return rungs >= 1;
}

std::optional<std::string> iterator_name(const StatementNode& w) {
    const auto& t = w.expression_tokens.at(0);
    if (t.size() == 5 && t[0].kind == TokenKind::identifier && t[1].is(".") && t[2].is("hasNext") && t[3].is("(") &&
        t[4].is(")")) {
        return t[0].text;
    }
    return std::nullopt;
}

bool calls_next_on(const StatementNode& w, const std::string& it) {
    for (const auto* d : w.preorder()) {
        const auto& t = d->tokens;
        for (std::size_t k = 0; k + 3 < t.size(); ++k) {
            if (t[k].is(it) && t[k + 1].is(".") && t[k + 2].is("next") && t[k + 3].is("(")) return true;
        }
    }
    return false;
}

std::unordered_set<std::string> identifiers_of(const std::vector<Token>& t) {
    std::unordered_set<std::string> out;
    for (const auto& tok : t) {
        if (tok.kind == TokenKind::identifier) out.insert(tok.text);
    }
    return out;
}

bool loop_matches_pipeline(const StatementNode& loop, const StatementNode& pipe) {
    auto pipe_ids = identifiers_of(pipe.tokens);
    std::unordered_set<std::string> loop_vars;
    std::unordered_set<std::string> source_ids;
    if (loop.kind == StatementKind::enhanced_for) {
        const auto& decl = loop.expression_tokens.at(0);
        if (!decl.empty()) loop_vars.insert(decl.back().text);
        source_ids = identifiers_of(loop.expression_tokens.at(1));
    } else {
        const auto& init = loop.expression_tokens.at(0);
        for (std::size_t k = 0; k + 1 < init.size(); ++k) {
            if (init[k].kind == TokenKind::identifier && init[k + 1].is("=")) loop_vars.insert(init[k].text);
        }
        for (const auto& id : identifiers_of(loop.expression_tokens.at(1))) {
            if (!loop_vars.count(id)) source_ids.insert(id);
        }
    }
    bool source_hit = false;
    for (const auto& id : source_ids) {
        if (!loop_vars.count(id) && pipe_ids.count(id)) source_hit = true;
    }
    if (!source_hit) return false;
    for (const auto* leaf : leaves_below(loop)) {
        for (const auto& id : identifiers_of(leaf->tokens)) {
            if (!loop_vars.count(id) && !source_ids.count(id) && pipe_ids.count(id)) return true;
        }
    }
    return false;
}

bool is_loop(StatementKind k) { return k == StatementKind::for_ || k == StatementKind::enhanced_for; }

std::optional<BlockTransformation> directed(const StatementNode& l, const StatementNode& r) {
    using K = StatementKind;
    const K a = l.kind;
    const K b = r.kind;
    if (a == K::if_ && b == K::switch_) {
        if (is_if_ladder_for(l, r.expressions.at(0))) {
            return BlockTransformation{TransformationKind::if_else_if_to_switch, Direction::forward};
        }
        return std::nullopt;
    }
    if (a == K::if_ && b == K::while_) {
        if (l.expressions == r.expressions || bodies_overlap(l, r)) {
            return BlockTransformation{TransformationKind::if_to_while, Direction::forward};
        }
        return std::nullopt;
    }
    if (a == K::while_ && b == K::enhanced_for) {
        auto it = iterator_name(l);
        if (it && calls_next_on(l, *it)) {
            return BlockTransformation{TransformationKind::iterator_while_to_enhanced_for, Direction::forward};
        }
        return std::nullopt;
    }
    if (a == K::for_ && b == K::while_) {
        if (l.expressions.at(1) == r.expressions.at(0) || bodies_overlap(l, r)) {
            return BlockTransformation{TransformationKind::for_to_while, Direction::forward};
        }
        return std::nullopt;
    }
    if (is_loop(a) && r.is_leaf() && r.is_pipeline) {
        if (loop_matches_pipeline(l, r)) return BlockTransformation{TransformationKind::for_to_pipeline, Direction::forward};
        return std::nullopt;
    }
    if (is_loop(a) && b == K::if_) {
        bool same_cond = a == K::for_ && l.expressions.at(1) == r.expressions.at(0);
        if (same_cond || bodies_overlap(l, r)) {
            return BlockTransformation{TransformationKind::for_to_if, Direction::forward};
        }
        return std::nullopt;
    }
    if (a == K::try_ && b == K::try_) {
        if (l.expressions.empty() && !r.expressions.empty()) {
            return BlockTransformation{TransformationKind::try_to_try_with_resources, Direction::forward};
        }
        return std::nullopt;
    }
    if (a == K::try_ && b == K::synchronized_) {
        if (bodies_overlap(l, r)) return BlockTransformation{TransformationKind::try_to_synchronized, Direction::forward};
        return std::nullopt;
    }
    if (a == K::catch_ && b == K::finally_) {
        if (bodies_overlap(l, r)) return BlockTransformation{TransformationKind::catch_to_finally, Direction::forward};
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

std::optional<BlockTransformation> detect_transformation(const StatementNode& l, const StatementNode& r) {
    if (l.is_leaf() && r.is_leaf()) return std::nullopt;
    if (auto t = directed(l, r)) return t;
    if (auto t = directed(r, l)) {
        t->direction = Direction::inverse;
        return t;
    }
    return std::nullopt;
}

}  // namespace blocktrace::stmtmap
