#include "blocktrace/refdetect.hpp"

#include <algorithm>

namespace blocktrace::refdetect {

using srcmodel::StatementKind;

std::string to_string(BodyRefactoringKind kind) {
    switch (kind) {
        case BodyRefactoringKind::replace_loop_with_pipeline: return "replace-loop-with-pipeline";
        case BodyRefactoringKind::replace_pipeline_with_loop: return "replace-pipeline-with-loop";
        case BodyRefactoringKind::invert_condition: return "invert-condition";
        case BodyRefactoringKind::split_conditional: return "split-conditional";
        case BodyRefactoringKind::merge_conditional: return "merge-conditional";
        case BodyRefactoringKind::merge_catch: return "merge-catch";
    }
    return "invert-condition";
}

namespace {

bool all_of_kind(const std::vector<const StatementNode*>& nodes, StatementKind kind) {
    return std::all_of(nodes.begin(), nodes.end(), [kind](const StatementNode* n) { return n->kind == kind; });
}

/// "! ( X )" -> "X"; empty when the expression is not a whole negation.
std::string strip_negation(const std::string& e) {
    const std::string open = "! ( ";
    if (e.rfind(open, 0) != 0 || e.size() < open.size() + 2 || e.compare(e.size() - 2, 2, " )") != 0) return {};
    const std::string inner = e.substr(open.size(), e.size() - open.size() - 2);
    int depth = 0;
    for (char c : inner) {  // reject "!(a) && (b)"
        if (c == '(') ++depth;
        if (c == ')' && --depth < 0) return {};
    }
    return depth == 0 ? inner : std::string();
}

bool flipped_operator(const std::string& a, const std::string& b) {
    static const std::vector<std::pair<std::string, std::string>> flips = {
        {"==", "!="}, {"<", ">="}, {">", "<="}};
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < s.size()) {
            auto j = s.find(' ', i);
            if (j == std::string::npos) j = s.size();
            out.push_back(s.substr(i, j - i));
            i = j + 1;
        }
        return out;
    };
    const auto ta = split(a), tb = split(b);
    if (ta.size() != tb.size()) return false;
    int diffs = 0;
    bool flip = false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i] == tb[i]) continue;
        ++diffs;
        for (const auto& [x, y] : flips) {
            if ((ta[i] == x && tb[i] == y) || (ta[i] == y && tb[i] == x)) flip = true;
        }
    }
    return diffs == 1 && flip;
}

bool inverted(const StatementNode& l, const StatementNode& r) {
    if (l.kind != StatementKind::if_ || r.kind != StatementKind::if_) return false;
    if (l.expressions.size() != 1 || r.expressions.size() != 1) return false;
    const auto& a = l.expressions[0];
    const auto& b = r.expressions[0];
    if (a == b) return false;
    return strip_negation(a) == b || strip_negation(b) == a || flipped_operator(a, b);
}

}  // namespace

std::vector<BodyRefactoring> detect_body_refactorings(const stmtmap::MappingSet& mapping) {
    std::vector<BodyRefactoring> out;
    for (const auto& m : mapping.mappings) {
        if (m.transformation && m.transformation->kind == stmtmap::TransformationKind::for_to_pipeline) {
            out.push_back({m.transformation->direction == stmtmap::Direction::forward
                               ? BodyRefactoringKind::replace_loop_with_pipeline
                               : BodyRefactoringKind::replace_pipeline_with_loop,
                           {m.left}, {m.right}});
        } else if (inverted(*m.left, *m.right)) {
            out.push_back({BodyRefactoringKind::invert_condition, {m.left}, {m.right}});
        }
    }
    for (const auto& g : mapping.multi) {
        if (g.left.size() == 1 && g.right.size() > 1 && all_of_kind(g.left, StatementKind::if_) &&
            all_of_kind(g.right, StatementKind::if_)) {
            out.push_back({BodyRefactoringKind::split_conditional, g.left, g.right});
        } else if (g.left.size() > 1 && g.right.size() == 1 && all_of_kind(g.left, StatementKind::catch_) &&
                   all_of_kind(g.right, StatementKind::catch_)) {
            out.push_back({BodyRefactoringKind::merge_catch, g.left, g.right});
        } else if (g.left.size() > 1 && g.right.size() == 1 && all_of_kind(g.left, StatementKind::if_) &&
                   all_of_kind(g.right, StatementKind::if_)) {
            out.push_back({BodyRefactoringKind::merge_conditional, g.left, g.right});
        }
    }
    return out;
}

std::vector<BodyRefactoring> detect_body_refactorings(const MethodPairing& pairing) {
    return detect_body_refactorings(pairing.mapping);
}

}  // namespace blocktrace::refdetect
