#include "blocktrace/tracker.hpp"

#include <algorithm>

namespace blocktrace::tracker {

using srcmodel::StatementKind;
using srcmodel::StatementNode;

namespace {

struct TypeInfo {
    ChangeType type;
    const char* tag;
};

constexpr TypeInfo kTypes[] = {
    {ChangeType::introduced, "introduced"},
    {ChangeType::body_change, "body-change"},
    {ChangeType::expression_change, "expression-change"},
    {ChangeType::catch_block_change, "catch-block-change"},
    {ChangeType::catch_block_added, "catch-block-added"},
    {ChangeType::catch_block_removed, "catch-block-removed"},
    {ChangeType::finally_block_change, "finally-block-change"},
    {ChangeType::finally_block_added, "finally-block-added"},
    {ChangeType::finally_block_removed, "finally-block-removed"},
    {ChangeType::block_split, "block-split"},
    {ChangeType::block_merge, "block-merge"},
    {ChangeType::replace_loop_with_pipeline, "replace-loop-with-pipeline"},
    {ChangeType::replace_pipeline_with_loop, "replace-pipeline-with-loop"},
    {ChangeType::block_type_migration, "block-type-migration"},
};

Change make(ChangeType type, const std::string& block, const std::string& extra = {}) {
    std::string d;
    switch (type) {
        case ChangeType::body_change: d = "The body of the " + block + " block changed"; break;
        case ChangeType::expression_change: d = "The expression of the " + block + " block changed"; break;
        case ChangeType::catch_block_change: d = "A catch block of the try changed"; break;
        case ChangeType::catch_block_added: d = "A catch block was added to the try"; break;
        case ChangeType::catch_block_removed: d = "A catch block was removed from the try"; break;
        case ChangeType::finally_block_change: d = "The finally block of the try changed"; break;
        case ChangeType::finally_block_added: d = "A finally block was added to the try"; break;
        case ChangeType::finally_block_removed: d = "The finally block was removed from the try"; break;
        default: d = extra; break;
    }
    return {type, d};
}

bool contains(const std::vector<const StatementNode*>& v, const StatementNode* n) {
    return std::find(v.begin(), v.end(), n) != v.end();
}

void compare_handlers(const StatementNode& l, const StatementNode& r, const stmtmap::MappingSet& m,
                      std::vector<Change>& out) {
    const auto lh = l.handlers();
    const auto rh = r.handlers();
    bool catch_changed = false, catch_added = false, catch_removed = false;
    bool fin_changed = false, fin_added = false, fin_removed = false;
    std::vector<const StatementNode*> seen;
    for (const auto* rc : rh) {
        std::vector<const StatementNode*> partners;
        if (const auto* pm = m.for_right(rc)) partners.push_back(pm->left);
        else if (const auto* g = m.multi_for_right(rc)) partners = g->left;
        partners.erase(std::remove_if(partners.begin(), partners.end(),
                                      [&](const StatementNode* x) { return !contains(lh, x) || x->kind != rc->kind; }),
                       partners.end());
        const bool is_catch = rc->kind == StatementKind::catch_;
        if (partners.empty()) {
            (is_catch ? catch_added : fin_added) = true;
            continue;
        }
        for (const auto* p : partners) {
            seen.push_back(p);
            if (p->text != rc->text || partners.size() > 1) (is_catch ? catch_changed : fin_changed) = true;
        }
    }
    for (const auto* lc : lh) {
        if (!contains(seen, lc)) (lc->kind == StatementKind::catch_ ? catch_removed : fin_removed) = true;
    }
    if (catch_changed) out.push_back(make(ChangeType::catch_block_change, "try"));
    if (catch_added) out.push_back(make(ChangeType::catch_block_added, "try"));
    if (catch_removed) out.push_back(make(ChangeType::catch_block_removed, "try"));
    if (fin_changed) out.push_back(make(ChangeType::finally_block_change, "try"));
    if (fin_added) out.push_back(make(ChangeType::finally_block_added, "try"));
    if (fin_removed) out.push_back(make(ChangeType::finally_block_removed, "try"));
}

}  // namespace

std::string to_string(ChangeType type) {
    for (const auto& t : kTypes) {
        if (t.type == type) return t.tag;
    }
    return "body-change";
}

std::optional<ChangeType> parse_change_type(std::string_view tag) {
    for (const auto& t : kTypes) {
        if (tag == t.tag) return t.type;
    }
    return std::nullopt;
}

const std::vector<ChangeType>& all_change_types() {
    static const std::vector<ChangeType> all = [] {
        std::vector<ChangeType> v;
        for (const auto& t : kTypes) v.push_back(t.type);
        return v;
    }();
    return all;
}

std::string to_string(StepCategory c) {
    switch (c) {
        case StepCategory::no_change: return "no-change";
        case StepCategory::change: return "change";
        case StepCategory::move: return "move";
    }
    return "no-change";
}

std::vector<Change> classify_changes(const StatementNode& left, const StatementNode& right,
                                     const stmtmap::MappingSet& mapping) {
    std::vector<Change> out;
    if (const auto* m = mapping.for_right(&right); m && m->left == &left && m->transformation) {
        out.push_back(make(ChangeType::block_type_migration, right.block_type(), m->transformation->label()));
        return out;
    }
    if (left.text == right.text) return out;
    const std::string block = right.block_type();
    if (left.expressions != right.expressions) out.push_back(make(ChangeType::expression_change, block));
    if (left.body_text != right.body_text) out.push_back(make(ChangeType::body_change, block));
    if (left.kind == StatementKind::try_ && right.kind == StatementKind::try_) compare_handlers(left, right, mapping, out);
    if (out.empty()) out.push_back(make(ChangeType::body_change, block));
    return out;
}

Change describe(ChangeType type, const std::string& block, const std::string& extra) { return make(type, block, extra); }

}  // namespace blocktrace::tracker
