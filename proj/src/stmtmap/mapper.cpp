#include "blocktrace/stmtmap.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace blocktrace::stmtmap {

using srcmodel::StatementKind;
using srcmodel::Token;
using srcmodel::TokenKind;

// ---- MappingSet ----

void MappingSet::reindex() {
    by_left_.clear();
    by_right_.clear();
    for (std::size_t i = 0; i < mappings.size(); ++i) {
        by_left_[mappings[i].left] = i;
        by_right_[mappings[i].right] = i;
    }
}

const StatementMapping* MappingSet::for_left(const StatementNode* n) const {
    auto it = by_left_.find(n);
    if (it != by_left_.end()) return &mappings[it->second];
    for (const auto& m : mappings) {
        if (m.left == n) return &m;
    }
    return nullptr;
}

const StatementMapping* MappingSet::for_right(const StatementNode* n) const {
    auto it = by_right_.find(n);
    if (it != by_right_.end()) return &mappings[it->second];
    for (const auto& m : mappings) {
        if (m.right == n) return &m;
    }
    return nullptr;
}

const MultiMapping* MappingSet::multi_for_left(const StatementNode* n) const {
    for (const auto& g : multi) {
        if (std::find(g.left.begin(), g.left.end(), n) != g.left.end()) return &g;
    }
    return nullptr;
}

const MultiMapping* MappingSet::multi_for_right(const StatementNode* n) const {
    for (const auto& g : multi) {
        if (std::find(g.right.begin(), g.right.end(), n) != g.right.end()) return &g;
    }
    return nullptr;
}

const StatementNode* MappingSet::partner_of_left(const StatementNode* n) const {
    if (const auto* m = for_left(n)) return m->right;
    if (const auto* g = multi_for_left(n)) {
        if (g->right.size() == 1) return g->right.front();
        return g->primary_left == n ? g->primary_right : nullptr;
    }
    return nullptr;
}

const StatementNode* MappingSet::partner_of_right(const StatementNode* n) const {
    if (const auto* m = for_right(n)) return m->left;
    if (const auto* g = multi_for_right(n)) {
        if (g->left.size() == 1) return g->left.front();
        return g->primary_right == n ? g->primary_left : nullptr;
    }
    return nullptr;
}

std::size_t MappingSet::total_replacements() const {
    std::size_t n = 0;
    for (const auto& m : mappings) n += m.replacements.size();
    return n;
}

MappingSet MappingSet::one_to_one() const {
    MappingSet out;
    out.mappings = mappings;
    out.unmatched_left = unmatched_left;
    out.unmatched_right = unmatched_right;
    for (const auto& g : multi) {
        for (const auto* l : g.left) {
            if (l != g.primary_left) out.unmatched_left.push_back(l);
        }
        for (const auto* r : g.right) {
            if (r != g.primary_right) out.unmatched_right.push_back(r);
        }
        if (g.primary_left && g.primary_right) {
            StatementMapping m;
            m.left = g.primary_left;
            m.right = g.primary_right;
            m.replacements = expression_replacements(*m.left, *m.right);
            out.mappings.push_back(std::move(m));
        } else {
            if (g.primary_left) out.unmatched_left.push_back(g.primary_left);
            if (g.primary_right) out.unmatched_right.push_back(g.primary_right);
        }
    }
    out.reindex();
    return out;
}

std::pair<std::size_t, std::size_t> objective(const MappingSet& m) {
    auto flat = m.multi.empty() ? m : m.one_to_one();
    return {flat.unmatched_left.size() + flat.unmatched_right.size(), flat.total_replacements()};
}

double child_match_ratio(const StatementNode& l, const StatementNode& r, const MappingSet& m) {
    const std::size_t denom = std::max(l.children.size(), r.children.size());
    if (denom == 0) return 1.0;
    std::size_t matched = 0;
    for (const auto& mp : m.mappings) {
        if (mp.left->is_descendant_of(l) && mp.right->is_descendant_of(r)) ++matched;
    }
    return std::min(1.0, static_cast<double>(matched) / static_cast<double>(denom));
}

// ---- pair evaluation ----

namespace {

constexpr std::int64_t kRatioScale = 1000;

Cost operator+(const Cost& a, const Cost& b) {
    Cost c;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Cost operator-(const Cost& a, const Cost& b) {
    Cost c;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Cost& operator+=(Cost& a, const Cost& b) { return a = a + b; }
Cost& operator-=(Cost& a, const Cost& b) { return a = a - b; }

int context_penalty(const StatementNode& l, const StatementNode& r) {
    const auto* pl = l.parent;
    const auto* pr = r.parent;
    const bool lroot = !pl || !pl->parent;
    const bool rroot = !pr || !pr->parent;
    if (lroot && rroot) return 0;
    if (lroot || rroot) return 2;
    if (pl->kind != pr->kind) return 2;
    return pl->expressions == pr->expressions ? 0 : 1;
}

std::vector<std::uint64_t> descendant_hashes(const StatementNode& n) {
    std::vector<std::uint64_t> out;
    for (const auto* d : n.preorder()) {
        if (d != &n && !d->is_case_label) out.push_back(d->text_hash);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Static stand-in for the child match ratio: descendants with an identical twin.
std::int64_t ratio_penalty(const StatementNode& l, const StatementNode& r) {
    const std::size_t denom = std::max(l.children.size(), r.children.size());
    if (denom == 0) return 0;
    auto a = descendant_hashes(l);
    auto b = descendant_hashes(r);
    std::size_t common = 0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
        if (a[i] == b[j]) {
            ++common;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const double ratio = std::min(1.0, static_cast<double>(common) / static_cast<double>(denom));
    return kRatioScale - static_cast<std::int64_t>(ratio * kRatioScale + 0.5);
}

bool calls_any(const StatementNode& n, const std::set<std::string>& names) {
    if (names.empty()) return false;
    for (const auto* d : n.preorder()) {
        const auto& t = d->tokens;
        for (std::size_t k = 0; k + 1 < t.size(); ++k) {
            if (t[k].kind == TokenKind::identifier && t[k + 1].is("(") && names.count(t[k].text)) return true;
        }
    }
    return false;
}

}  // namespace

std::optional<PairEvaluation> evaluate_pair(const StatementNode& l, const StatementNode& r, const PairContext& ctx) {
    PairEvaluation ev;
    const std::int64_t dist =
        std::llabs(static_cast<long long>((l.start_line - ctx.left_base_line) - (r.start_line - ctx.right_base_line)));
    if (l.is_leaf() && r.is_leaf()) {
        auto reps = leaf_replacements(l, r);
        if (!reps) return std::nullopt;
        ev.replacements = std::move(*reps);
        ev.self_valid = true;
        ev.cost = {0, static_cast<std::int64_t>(ev.replacements.size()), 0, context_penalty(l, r), dist, 0};
        return ev;
    }
    if (l.is_leaf() != r.is_leaf()) {
        auto t = detect_transformation(l, r);
        if (!t) return std::nullopt;
        ev.transformation = t;
        ev.self_valid = true;
        ev.cost = {0, 0, 0, context_penalty(l, r), dist, 0};
        return ev;
    }
    if (l.kind == r.kind) {
        ev.replacements = expression_replacements(l, r);
        ev.transformation = detect_transformation(l, r);  // try <-> try-with-resources only
        const bool identical = !l.expressions.empty() && l.expressions == r.expressions;
        const bool bridged = ctx.options && (calls_any(l, ctx.options->bridging_calls) ||
                                             calls_any(r, ctx.options->bridging_calls));
        ev.self_valid = identical || bridged;
    } else {
        auto t = detect_transformation(l, r);
        if (!t) return std::nullopt;
        ev.transformation = t;
        ev.replacements = expression_replacements(l, r);
        ev.self_valid = true;
    }
    ev.cost = {0, static_cast<std::int64_t>(ev.replacements.size()), ratio_penalty(l, r), context_penalty(l, r), dist,
               0};
    return ev;
}

// ---- assignment ----

namespace {

constexpr Cost kMatchBonus = {2, 0, 0, 0, 0, 0};
constexpr Cost kForbidden = {std::int64_t{1} << 40, 0, 0, 0, 0, 0};
constexpr Cost kInfinity = {std::int64_t{1} << 60, 0, 0, 0, 0, 0};

/// Min-cost perfect assignment on a square matrix (potentials method).
/// Returns row -> column.
std::vector<int> hungarian(const std::vector<std::vector<Cost>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<Cost> u(n + 1, Cost{}), v(n + 1, Cost{});
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<Cost> minv(n + 1, kInfinity);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            Cost delta = kInfinity;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                Cost cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

struct Candidate {
    int l;  // index into left nodes
    int r;  // index into right nodes
    PairEvaluation eval;
    std::vector<int> supports;  // self-valid candidates strictly below (l, r)
};

class Solver {
public:
    Solver(const std::vector<const StatementNode*>& left, const std::vector<const StatementNode*>& right,
           const MapperOptions& options)
        : left_(left), right_(right), options_(options) {}

    MappingSet run() {
        index_nodes();
        build_candidates();
        std::vector<int> chosen;
        for (const auto& comp : components()) {
            auto picked = solve_component(comp);
            chosen.insert(chosen.end(), picked.begin(), picked.end());
        }
        return assemble(chosen);
    }

private:
    const std::vector<const StatementNode*>& left_;
    const std::vector<const StatementNode*>& right_;
    const MapperOptions& options_;
    std::unordered_map<const StatementNode*, int> lidx_, ridx_;
    std::vector<Candidate> cands_;
    std::vector<std::vector<int>> lcands_;  // per left node
    PairContext ctx_;

    void index_nodes() {
        for (std::size_t i = 0; i < left_.size(); ++i) lidx_[left_[i]] = static_cast<int>(i);
        for (std::size_t j = 0; j < right_.size(); ++j) ridx_[right_[j]] = static_cast<int>(j);
        ctx_.left_base_line = left_.empty() ? 0 : left_.front()->start_line;
        ctx_.right_base_line = right_.empty() ? 0 : right_.front()->start_line;
        ctx_.options = &options_;
    }

    std::vector<int> ancestors(const StatementNode* n, const std::unordered_map<const StatementNode*, int>& idx) const {
        std::vector<int> out;
        for (const auto* p = n->parent; p; p = p->parent) {
            auto it = idx.find(p);
            if (it == idx.end()) break;
            out.push_back(it->second);
        }
        return out;
    }

    void build_candidates() {
        lcands_.assign(left_.size(), {});
        std::vector<Candidate> dependent;
        std::unordered_map<std::int64_t, int> dependent_at;
        auto key = [&](int l, int r) { return static_cast<std::int64_t>(l) * static_cast<std::int64_t>(right_.size()) + r; };
        for (std::size_t i = 0; i < left_.size(); ++i) {
            for (std::size_t j = 0; j < right_.size(); ++j) {
                auto ev = evaluate_pair(*left_[i], *right_[j], ctx_);
                if (!ev) continue;
                ev->cost[5] = std::abs(static_cast<long long>(i) - static_cast<long long>(j));
                Candidate c{static_cast<int>(i), static_cast<int>(j), std::move(*ev), {}};
                if (c.eval.self_valid) {
                    cands_.push_back(std::move(c));
                } else {
                    dependent_at[key(c.l, c.r)] = static_cast<int>(dependent.size());
                    dependent.push_back(std::move(c));
                }
            }
        }
        // Every self-valid pair supports each dependent pair above it on both sides.
        const std::size_t self_valid = cands_.size();
        for (std::size_t s = 0; s < self_valid; ++s) {
            auto la = ancestors(left_[cands_[s].l], lidx_);
            auto ra = ancestors(right_[cands_[s].r], ridx_);
            for (int x : la) {
                for (int y : ra) {
                    auto it = dependent_at.find(key(x, y));
                    if (it != dependent_at.end()) dependent[it->second].supports.push_back(static_cast<int>(s));
                }
            }
        }
        for (auto& d : dependent) {
            if (!d.supports.empty()) cands_.push_back(std::move(d));
        }
        for (std::size_t c = 0; c < cands_.size(); ++c) lcands_[cands_[c].l].push_back(static_cast<int>(c));
    }

    struct Component {
        std::vector<int> lefts;
        std::vector<int> rights;
        std::vector<int> cands;
    };

    std::vector<Component> components() const {
        const int nl = static_cast<int>(left_.size());
        std::vector<int> parent(left_.size() + right_.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
        for (const auto& c : cands_) {
            unite(c.l, nl + c.r);
            for (int s : c.supports) unite(c.l, cands_[s].l);
        }
        std::map<int, Component> by_root;
        for (std::size_t c = 0; c < cands_.size(); ++c) by_root[find(cands_[c].l)].cands.push_back(static_cast<int>(c));
        for (int i = 0; i < nl; ++i) {
            auto it = by_root.find(find(i));
            if (it != by_root.end()) it->second.lefts.push_back(i);
        }
        for (int j = 0; j < static_cast<int>(right_.size()); ++j) {
            auto it = by_root.find(find(nl + j));
            if (it != by_root.end()) it->second.rights.push_back(j);
        }
        std::vector<Component> out;
        for (auto& [root, comp] : by_root) out.push_back(std::move(comp));
        return out;
    }

    struct Solution {
        Cost total{};
        std::vector<int> chosen;
    };

    Solution relax(const Component& comp, const std::vector<char>& forbidden, const std::vector<int>& forced) const {
        const std::size_t n = std::max(comp.lefts.size(), comp.rights.size());
        std::unordered_map<int, int> row_of, col_of;
        for (std::size_t i = 0; i < comp.lefts.size(); ++i) row_of[comp.lefts[i]] = static_cast<int>(i);
        for (std::size_t j = 0; j < comp.rights.size(); ++j) col_of[comp.rights[j]] = static_cast<int>(j);
        std::vector<std::vector<Cost>> a(n, std::vector<Cost>(n, Cost{}));
        std::vector<std::vector<int>> cell(n, std::vector<int>(n, -1));
        for (int c : comp.cands) {
            if (forbidden[c]) continue;
            int i = row_of.at(cands_[c].l);
            int j = col_of.at(cands_[c].r);
            a[i][j] = cands_[c].eval.cost - kMatchBonus;
            cell[i][j] = c;
        }
        for (int c : forced) {
            int fi = row_of.at(cands_[c].l);
            int fj = col_of.at(cands_[c].r);
            for (std::size_t k = 0; k < n; ++k) {
                if (static_cast<int>(k) != fj) a[fi][k] = kForbidden;
                if (static_cast<int>(k) != fi) a[k][fj] = kForbidden;
            }
        }
        auto assign = hungarian(a);
        Solution s;
        for (std::size_t i = 0; i < n; ++i) {
            const int j = assign[i];
            s.total += a[i][j];
            if (cell[i][j] >= 0) s.chosen.push_back(cell[i][j]);
        }
        return s;
    }

    /// First chosen dependent pair without a chosen supporter, or -1.
    int violation(const Solution& s) const {
        std::unordered_set<int> chosen(s.chosen.begin(), s.chosen.end());
        std::vector<int> order = s.chosen;
        std::sort(order.begin(), order.end());
        for (int c : order) {
            const auto& cand = cands_[c];
            if (cand.eval.self_valid) continue;
            bool ok = std::any_of(cand.supports.begin(), cand.supports.end(), [&](int x) { return chosen.count(x); });
            if (!ok) return c;
        }
        return -1;
    }

    std::vector<int> solve_component(const Component& comp) const {
        struct Node {
            std::vector<char> forbidden;
            std::vector<int> forced;
        };
        std::optional<Solution> best;
        std::vector<Node> stack;
        stack.push_back({std::vector<char>(cands_.size(), 0), {}});
        int solves = 0;
        while (!stack.empty() && solves < options_.search_budget) {
            Node node = std::move(stack.back());
            stack.pop_back();
            auto sol = relax(comp, node.forbidden, node.forced);
            ++solves;
            if (sol.total[0] > kForbidden[0] / 2) continue;  // forced pairs infeasible
            if (best && !(sol.total < best->total)) continue;
            int v = violation(sol);
            if (v < 0) {
                best = std::move(sol);
                continue;
            }
            // Branches: keep v with one of its supporters, or drop v. Dropping is explored first.
            const auto& cand = cands_[v];
            for (auto it = cand.supports.rbegin(); it != cand.supports.rend(); ++it) {
                int s = *it;
                if (node.forbidden[s]) continue;
                if (conflicts(node.forced, s) || conflicts(node.forced, v)) continue;
                Node keep = node;
                keep.forced.push_back(v);
                keep.forced.push_back(s);
                stack.push_back(std::move(keep));
            }
            Node drop = node;
            drop.forbidden[v] = 1;
            stack.push_back(std::move(drop));
        }
        if (!best) {
            // Budget exhausted before any feasible leaf: drop violators until none remain.
            std::vector<char> forbidden(cands_.size(), 0);
            while (true) {
                auto sol = relax(comp, forbidden, {});
                int v = violation(sol);
                if (v < 0) {
                    best = std::move(sol);
                    break;
                }
                forbidden[v] = 1;
            }
        }
        return best->chosen;
    }

    bool conflicts(const std::vector<int>& forced, int c) const {
        for (int f : forced) {
            if (f == c) continue;
            if (cands_[f].l == cands_[c].l || cands_[f].r == cands_[c].r) return true;
        }
        return false;
    }

    MappingSet assemble(const std::vector<int>& chosen) const {
        MappingSet out;
        std::vector<char> lused(left_.size(), 0), rused(right_.size(), 0);
        std::vector<int> order = chosen;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return cands_[a].l < cands_[b].l; });
        for (int c : order) {
            const auto& cand = cands_[c];
            StatementMapping m;
            m.left = left_[cand.l];
            m.right = right_[cand.r];
            m.replacements = cand.eval.replacements;
            m.transformation = cand.eval.transformation;
            out.mappings.push_back(std::move(m));
            lused[cand.l] = 1;
            rused[cand.r] = 1;
        }
        for (std::size_t i = 0; i < left_.size(); ++i) {
            if (!lused[i]) out.unmatched_left.push_back(left_[i]);
        }
        for (std::size_t j = 0; j < right_.size(); ++j) {
            if (!rused[j]) out.unmatched_right.push_back(right_[j]);
        }
        out.reindex();
        return out;
    }
};

// ---- multi-mappings ----

std::vector<std::string> split_top_level(const std::vector<Token>& t, std::string_view op) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= t.size(); ++k) {
        if (k < t.size()) {
            if (t[k].is("(") || t[k].is("[") || t[k].is("{")) ++depth;
            else if (t[k].is(")") || t[k].is("]") || t[k].is("}")) --depth;
        }
        if (k == t.size() || (depth == 0 && t[k].is(op))) {
            std::size_t b = start, e = k;
            // Strip one layer of enclosing parentheses.
            if (e - b >= 2 && t[b].is("(") && t[e - 1].is(")")) {
                int d = 0;
                bool wraps = true;
                for (std::size_t x = b; x < e; ++x) {
                    if (t[x].is("(")) ++d;
                    else if (t[x].is(")")) --d;
                    if (d == 0 && x + 1 < e) wraps = false;
                }
                if (wraps) {
                    ++b;
                    --e;
                }
            }
            parts.push_back(srcmodel::join_tokens(t, b, e));
            start = k + 1;
        }
    }
    return parts;
}

std::vector<std::string> catch_types(const StatementNode& c) {
    const auto& t = c.expression_tokens.at(0);
    std::vector<std::string> out;
    if (t.empty()) return out;
    std::vector<Token> types(t.begin(), t.end() - 1);  // drop the variable name
    while (!types.empty() && (types.front().is("final") || types.front().is("@"))) types.erase(types.begin());
    return split_top_level(types, "|");
}

/// Parts of the single side's expression covered one-to-one by the group's expressions.
bool expressions_cover(const StatementNode& single, const std::vector<const StatementNode*>& group) {
    if (group.size() < 2) return false;
    std::vector<std::string> parts;
    if (single.kind == StatementKind::catch_) {
        parts = catch_types(single);
    } else if (single.kind == StatementKind::if_ || single.kind == StatementKind::while_) {
        parts = split_top_level(single.expression_tokens.at(0), "&&");
        if (parts.size() < 2) parts = split_top_level(single.expression_tokens.at(0), "||");
    } else {
        return false;
    }
    if (parts.size() < 2) return false;
    std::set<std::string> seen;
    for (const auto* g : group) {
        if (g->kind != single.kind) return false;
        std::vector<std::string> mine =
            single.kind == StatementKind::catch_ ? catch_types(*g) : std::vector<std::string>{g->expressions.at(0)};
        if (mine.empty()) return false;
        for (const auto& m : mine) {
            if (std::find(parts.begin(), parts.end(), m) == parts.end()) return false;
            if (!seen.insert(m).second) return false;
        }
    }
    return true;
}

void detect_multi(MappingSet& m, const PairContext& ctx) {
    auto try_side = [&](bool merge) {
        auto& singles_pool = merge ? m.unmatched_right : m.unmatched_left;
        auto& group_pool = merge ? m.unmatched_left : m.unmatched_right;
        // Single-side candidates: mapped or unmatched composites on the single side.
        std::vector<const StatementNode*> singles;
        for (const auto& mp : m.mappings) singles.push_back(merge ? mp.right : mp.left);
        singles.insert(singles.end(), singles_pool.begin(), singles_pool.end());
        for (const auto* single : singles) {
            if (!single->is_composite()) continue;
            if (m.multi_for_left(single) || m.multi_for_right(single)) continue;
            const StatementMapping* plain = merge ? m.for_right(single) : m.for_left(single);
            const StatementNode* primary = plain ? (merge ? plain->left : plain->right) : nullptr;
            std::vector<const StatementNode*> group;
            if (primary) group.push_back(primary);
            for (const auto* g : group_pool) {
                if (!g->is_composite() || g->kind != single->kind) continue;
                auto ev = merge ? evaluate_pair(*g, *single, ctx) : evaluate_pair(*single, *g, ctx);
                if (ev && (ev->self_valid || bodies_overlap(*g, *single))) group.push_back(g);
            }
            if (!expressions_cover(*single, group)) continue;
            MultiMapping mm;
            if (merge) {
                mm.left = group;
                mm.right = {single};
                mm.primary_left = primary;
                mm.primary_right = primary ? single : nullptr;
            } else {
                mm.left = {single};
                mm.right = group;
                mm.primary_left = primary ? single : nullptr;
                mm.primary_right = primary;
            }
            std::sort(mm.left.begin(), mm.left.end(),
                      [](auto* a, auto* b) { return a->start_line < b->start_line; });
            std::sort(mm.right.begin(), mm.right.end(),
                      [](auto* a, auto* b) { return a->start_line < b->start_line; });
            auto erase_from = [](std::vector<const StatementNode*>& v, const StatementNode* n) {
                v.erase(std::remove(v.begin(), v.end(), n), v.end());
            };
            for (const auto* g : group) erase_from(group_pool, g);
            erase_from(singles_pool, single);
            if (plain) {
                auto it = std::find_if(m.mappings.begin(), m.mappings.end(),
                                       [&](const StatementMapping& x) { return &x == plain; });
                m.mappings.erase(it);
                m.reindex();
            }
            m.multi.push_back(std::move(mm));
        }
    };
    try_side(true);
    try_side(false);
}

std::vector<const StatementNode*> collect(const std::vector<const StatementNode*>& roots) {
    std::vector<const StatementNode*> out;
    for (const auto* r : roots) {
        auto pre = r->preorder();
        out.insert(out.end(), pre.begin(), pre.end());
    }
    return out;
}

}  // namespace

MappingSet map_statements(const std::vector<const StatementNode*>& left_roots,
                          const std::vector<const StatementNode*>& right_roots, const MapperOptions& options) {
    auto left = collect(left_roots);
    auto right = collect(right_roots);
    if (left.size() + right.size() > options.size_limit) {
        throw SizeLimit("statement mapping of " + std::to_string(left.size() + right.size()) +
                        " nodes exceeds the limit of " + std::to_string(options.size_limit));
    }
    Solver solver(left, right, options);
    auto result = solver.run();
    PairContext ctx;
    ctx.left_base_line = left.empty() ? 0 : left.front()->start_line;
    ctx.right_base_line = right.empty() ? 0 : right.front()->start_line;
    ctx.options = &options;
    detect_multi(result, ctx);
    result.reindex();
    return result;
}

MappingSet map_bodies(const srcmodel::MethodDeclarationInfo& left, const srcmodel::MethodDeclarationInfo& right,
                      const MapperOptions& options) {
    std::vector<const StatementNode*> lr, rr;
    if (left.body) {
        for (const auto& c : left.body->children) lr.push_back(&c);
    }
    if (right.body) {
        for (const auto& c : right.body->children) rr.push_back(&c);
    }
    return map_statements(lr, rr, options);
}

}  // namespace blocktrace::stmtmap
