#include "mapping_oracle.hpp"

#include <algorithm>
#include <functional>
#include <regex>

namespace blocktrace::testing {

using srcmodel::StatementNode;
using stmtmap::PairContext;
using stmtmap::PairEvaluation;

namespace {

std::vector<const StatementNode*> nodes_of(const srcmodel::MethodDeclarationInfo& m) {
    std::vector<const StatementNode*> out;
    if (!m.body) return out;
    for (const auto& c : m.body->children) {
        auto pre = c.preorder();
        out.insert(out.end(), pre.begin(), pre.end());
    }
    return out;
}

}  // namespace

OracleOptimum brute_force_optimum(const srcmodel::MethodDeclarationInfo& left,
                                  const srcmodel::MethodDeclarationInfo& right) {
    auto L = nodes_of(left);
    auto R = nodes_of(right);
    stmtmap::MapperOptions options;
    PairContext ctx;
    ctx.left_base_line = L.empty() ? 0 : L.front()->start_line;
    ctx.right_base_line = R.empty() ? 0 : R.front()->start_line;
    ctx.options = &options;

    struct Cand {
        std::size_t r;
        std::size_t replacements;
        bool self_valid;
    };
    std::vector<std::vector<Cand>> cands(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        for (std::size_t j = 0; j < R.size(); ++j) {
            if (auto ev = stmtmap::evaluate_pair(*L[i], *R[j], ctx)) {
                cands[i].push_back({j, ev->replacements.size(), ev->self_valid});
            }
        }
    }

    OracleOptimum best;
    bool have = false;
    std::vector<std::pair<std::size_t, const Cand*>> chosen;
    std::vector<char> used(R.size(), 0);

    auto admissible = [&]() {
        for (const auto& [i, c] : chosen) {
            if (c->self_valid) continue;
            bool supported = false;
            for (const auto& [a, d] : chosen) {
                if (L[a]->is_descendant_of(*L[i]) && R[d->r]->is_descendant_of(*R[c->r])) {
                    supported = true;
                    break;
                }
            }
            if (!supported) return false;
        }
        return true;
    };

    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t repl) {
        if (i == L.size()) {
            ++best.explored;
            if (!admissible()) return;
            const std::size_t unmatched = L.size() + R.size() - 2 * chosen.size();
            if (!have || unmatched < best.unmatched || (unmatched == best.unmatched && repl < best.replacements)) {
                have = true;
                best.unmatched = unmatched;
                best.replacements = repl;
                best.optimal_matchings = 1;
            } else if (unmatched == best.unmatched && repl == best.replacements) {
                ++best.optimal_matchings;
            }
            return;
        }
        rec(i + 1, repl);
        for (const auto& c : cands[i]) {
            if (used[c.r]) continue;
            used[c.r] = 1;
            chosen.emplace_back(i, &c);
            rec(i + 1, repl + c.replacements);
            chosen.pop_back();
            used[c.r] = 0;
        }
    };
    rec(0, 0);
    return best;
}

bool mapping_is_admissible(const stmtmap::MappingSet& m) {
    auto flat = m.one_to_one();
    stmtmap::MapperOptions options;
    PairContext ctx;
    ctx.options = &options;
    for (const auto& mp : flat.mappings) {
        auto ev = stmtmap::evaluate_pair(*mp.left, *mp.right, ctx);
        if (!ev) return false;
        if (ev->self_valid) continue;
        bool supported = false;
        for (const auto& other : flat.mappings) {
            if (other.left->is_descendant_of(*mp.left) && other.right->is_descendant_of(*mp.right)) {
                supported = true;
                break;
            }
        }
        if (!supported) return false;
    }
    return true;
}

// ---- random bodies ----

namespace {

enum class GKind { leaf, if_, while_, for_, foreach, try_, if_else };

struct G {
    GKind kind{GKind::leaf};
    std::string text;  // leaf statement or header expression
    std::vector<G> a;  // body
    std::vector<G> b;  // else branch or catch body
};

const std::vector<std::string> kVars = {"a", "b", "c", "total"};
const std::vector<std::string> kFuncs = {"foo", "bar", "compute"};
const std::vector<std::string> kNums = {"1", "2", "3", "10"};
const std::vector<std::string> kLeafTemplates = {
    "{v} = {v} + {n};", "{f}({v});",      "int {v}2 = {v} * {n};", "{v}++;",
    "items.add({v});",  "return {v};",    "log(\"{s}\");",         "{v} = {f}({v}, {n});",
};
const std::vector<std::string> kStrings = {"start", "done", "retry"};

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

std::string fill(std::mt19937& rng, std::string t) {
    auto replace_all = [&](const std::string& key, const std::vector<std::string>& pool) {
        const std::string chosen = pick(rng, pool);
        for (std::size_t p = t.find(key); p != std::string::npos; p = t.find(key, p + chosen.size())) {
            t.replace(p, key.size(), chosen);
        }
    };
    replace_all("{v}", kVars);
    replace_all("{f}", kFuncs);
    replace_all("{n}", kNums);
    replace_all("{s}", kStrings);
    return t;
}

std::string condition(std::mt19937& rng) {
    static const std::vector<std::string> ops = {">", "<", "==", "!="};
    return pick(rng, kVars) + " " + pick(rng, ops) + " " + pick(rng, kNums);
}

std::size_t count(const std::vector<G>& gs);

std::size_t count(const G& g) {
    switch (g.kind) {
        case GKind::leaf: return 1;
        case GKind::try_: return 2 + count(g.a) + count(g.b);
        default: return 1 + count(g.a) + count(g.b);
    }
}

std::size_t count(const std::vector<G>& gs) {
    std::size_t n = 0;
    for (const auto& g : gs) n += count(g);
    return n;
}

G random_leaf(std::mt19937& rng) { return G{GKind::leaf, fill(rng, pick(rng, kLeafTemplates)), {}, {}}; }

std::vector<G> random_block(std::mt19937& rng, int depth, std::size_t budget) {
    std::vector<G> out;
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n && count(out) < budget; ++i) {
        const std::size_t left = budget - count(out);
        if (depth < 2 && left >= 3 && chance(rng, 0.4)) {
            G g;
            const int k = std::uniform_int_distribution<int>(0, 5)(rng);
            g.kind = static_cast<GKind>(k + 1);
            switch (g.kind) {
                case GKind::if_:
                case GKind::while_:
                case GKind::if_else: g.text = condition(rng); break;
                case GKind::for_: g.text = "int i = 0; i < " + pick(rng, kNums) + "; i++"; break;
                case GKind::foreach: g.text = "String s : items"; break;
                default: break;
            }
            g.a = random_block(rng, depth + 1, left - (g.kind == GKind::try_ ? 3 : 2));
            if (g.kind == GKind::try_ || g.kind == GKind::if_else) {
                g.b = random_block(rng, depth + 1, 1);
            }
            if (count(out) + count(g) <= budget) out.push_back(std::move(g));
        } else {
            out.push_back(random_leaf(rng));
        }
    }
    return out;
}

void render(const std::vector<G>& gs, std::string& out, int indent);

void render(const G& g, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
    switch (g.kind) {
        case GKind::leaf: out += pad + g.text + "\n"; return;
        case GKind::if_: out += pad + "if (" + g.text + ") {\n"; break;
        case GKind::if_else: out += pad + "if (" + g.text + ") {\n"; break;
        case GKind::while_: out += pad + "while (" + g.text + ") {\n"; break;
        case GKind::for_:
        case GKind::foreach: out += pad + "for (" + g.text + ") {\n"; break;
        case GKind::try_: out += pad + "try {\n"; break;
    }
    render(g.a, out, indent + 1);
    if (g.kind == GKind::if_else) {
        out += pad + "} else {\n";
        render(g.b, out, indent + 1);
    } else if (g.kind == GKind::try_) {
        out += pad + "} catch (Exception e) {\n";
        render(g.b, out, indent + 1);
    }
    out += pad + "}\n";
}

void render(const std::vector<G>& gs, std::string& out, int indent) {
    for (const auto& g : gs) render(g, out, indent);
}

std::string rename_word(std::mt19937& rng, const std::string& text) {
    std::vector<std::string> present;
    for (const auto& v : kVars) {
        if (std::regex_search(text, std::regex("\\b" + v + "\\b"))) present.push_back(v);
    }
    for (const auto& f : kFuncs) {
        if (std::regex_search(text, std::regex("\\b" + f + "\\b"))) present.push_back(f);
    }
    for (const auto& n : kNums) {
        if (std::regex_search(text, std::regex("\\b" + n + "\\b"))) present.push_back(n);
    }
    if (present.empty()) return text;
    const std::string from = pick(rng, present);
    std::string to;
    if (std::find(kNums.begin(), kNums.end(), from) != kNums.end()) to = pick(rng, kNums);
    else if (std::find(kFuncs.begin(), kFuncs.end(), from) != kFuncs.end()) to = pick(rng, kFuncs);
    else to = pick(rng, std::vector<std::string>{"a", "b", "c", "total", "sum", "x"});
    return std::regex_replace(text, std::regex("\\b" + from + "\\b"), to);
}

std::vector<G> mutate(std::mt19937& rng, const std::vector<G>& in, int depth) {
    std::vector<G> out;
    for (const auto& g : in) {
        const double r = std::uniform_real_distribution<double>(0, 1)(rng);
        if (r < 0.12) {
            if (g.kind != GKind::leaf && chance(rng, 0.5)) {
                auto kids = mutate(rng, g.a, depth);
                out.insert(out.end(), kids.begin(), kids.end());  // unwrap
            }
            continue;  // drop
        }
        G copy = g;
        if (r < 0.35) copy.text = rename_word(rng, copy.text);
        if (copy.kind != GKind::leaf) {
            if (chance(rng, 0.2) && copy.kind != GKind::for_ && copy.kind != GKind::foreach &&
                copy.kind != GKind::try_) {
                copy.text = condition(rng);
            }
            copy.a = mutate(rng, copy.a, depth + 1);
            copy.b = mutate(rng, copy.b, depth + 1);
            if (copy.kind == GKind::try_ && copy.b.empty()) copy.b.push_back(random_leaf(rng));
        }
        if (r > 0.92 && depth < 2) {
            G wrap{GKind::if_, condition(rng), {std::move(copy)}, {}};
            out.push_back(std::move(wrap));
        } else {
            out.push_back(std::move(copy));
        }
        if (chance(rng, 0.12)) out.push_back(random_leaf(rng));
    }
    if (out.size() >= 2 && chance(rng, 0.15)) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, out.size() - 2)(rng);
        std::swap(out[k], out[k + 1]);
    }
    return out;
}

}  // namespace

BodyPair parse_pair(const std::string& left_body, const std::string& right_body) {
    BodyPair p;
    p.left_source = "class T {\n  int run(int a, int b, int c, int total) {\n" + left_body + "  }\n}\n";
    p.right_source = "class T {\n  int run(int a, int b, int c, int total) {\n" + right_body + "  }\n}\n";
    p.left_unit = srcmodel::parse_file(p.left_source, "T.java");
    p.right_unit = srcmodel::parse_file(p.right_source, "T.java");
    return p;
}

BodyPair random_body_pair(std::mt19937& rng, std::size_t max_nodes) {
    while (true) {
        auto left = random_block(rng, 0, max_nodes);
        while (count(left) < max_nodes && chance(rng, 0.7)) {
            auto more = random_block(rng, 0, max_nodes - count(left));
            if (count(left) + count(more) > max_nodes) break;
            left.insert(left.end(), more.begin(), more.end());
        }
        auto right = mutate(rng, left, 0);
        if (right.empty() || count(left) > max_nodes || count(right) > max_nodes) continue;
        std::string lb, rb;
        render(left, lb, 2);
        render(right, rb, 2);
        return parse_pair(lb, rb);
    }
}

}  // namespace blocktrace::testing
