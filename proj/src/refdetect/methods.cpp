#include "blocktrace/refdetect.hpp"
#include "detail.hpp"

#include <algorithm>
#include <map>

namespace blocktrace::refdetect {

using stmtmap::MappingSet;

std::string to_string(PairingKind kind) {
    switch (kind) {
        case PairingKind::identical_signature: return "identical-signature";
        case PairingKind::signature_changed: return "signature-changed";
        case PairingKind::extracted: return "extracted";
        case PairingKind::inlined: return "inlined";
        case PairingKind::merged: return "merged";
        case PairingKind::split: return "split";
        case PairingKind::moved: return "moved";
        case PairingKind::pulled_up: return "pulled-up";
        case PairingKind::pushed_down: return "pushed-down";
        case PairingKind::extracted_and_moved: return "extracted-and-moved";
    }
    return "moved";
}

bool MethodPairing::involves_right(const MethodDeclarationInfo* m) const {
    return std::find(right.begin(), right.end(), m) != right.end();
}

bool MethodPairing::involves_left(const MethodDeclarationInfo* m) const {
    return std::find(left.begin(), left.end(), m) != left.end();
}

namespace detail {

std::vector<const StatementNode*> body_nodes(const MethodDeclarationInfo& m) {
    std::vector<const StatementNode*> out;
    if (!m.body) return out;
    for (const auto& c : m.body->children) {
        auto pre = c.preorder();
        out.insert(out.end(), pre.begin(), pre.end());
    }
    return out;
}

std::vector<const StatementNode*> body_roots(const MethodDeclarationInfo& m) {
    std::vector<const StatementNode*> out;
    if (!m.body) return out;
    for (const auto& c : m.body->children) out.push_back(&c);
    return out;
}

MappingSet identity_mapping(const MethodDeclarationInfo& l, const MethodDeclarationInfo& r) {
    MappingSet m;
    auto a = body_nodes(l);
    auto b = body_nodes(r);
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        stmtmap::StatementMapping sm;
        sm.left = a[i];
        sm.right = b[i];
        m.mappings.push_back(std::move(sm));
    }
    for (std::size_t i = b.size(); i < a.size(); ++i) m.unmatched_left.push_back(a[i]);
    for (std::size_t i = a.size(); i < b.size(); ++i) m.unmatched_right.push_back(b[i]);
    m.reindex();
    return m;
}

MappingSet map_methods(const MethodDeclarationInfo& l, const MethodDeclarationInfo& r, const Config& config) {
    if (l.body_hash == r.body_hash && l.body_text == r.body_text) return identity_mapping(l, r);
    return stmtmap::map_bodies(l, r, config.mapper);
}

std::size_t matched_left(const MappingSet& m) {
    std::size_t n = m.mappings.size();
    for (const auto& g : m.multi) n += g.left.size();
    return n;
}

std::size_t matched_right(const MappingSet& m) {
    std::size_t n = m.mappings.size();
    for (const auto& g : m.multi) n += g.right.size();
    return n;
}

std::size_t replacement_count(const MappingSet& m) { return m.total_replacements(); }

bool calls(const MethodDeclarationInfo& caller, const std::string& name) {
    return caller.called_names().count(name) > 0;
}

}  // namespace detail

using namespace detail;

double match_score(const MethodDeclarationInfo& left, const MethodDeclarationInfo& right, const MappingSet& mapping) {
    const std::size_t nl = body_nodes(left).size();
    const std::size_t nr = body_nodes(right).size();
    const std::size_t denom = std::max(nl, nr);
    if (denom == 0) return left.body_text == right.body_text ? 1.0 : 0.0;
    const std::size_t matched = std::min(matched_left(mapping), matched_right(mapping));
    return static_cast<double>(matched) / static_cast<double>(denom);
}

std::vector<const StatementNode*> unmatched_roots(const std::vector<const StatementNode*>& unmatched) {
    std::set<const StatementNode*> in(unmatched.begin(), unmatched.end());
    std::vector<const StatementNode*> out;
    for (const auto* n : unmatched) {
        const auto* p = n->parent;
        const bool parent_is_root = !p || !p->parent;
        if (parent_is_root || !in.count(p)) out.push_back(n);
    }
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->start_line < b->start_line; });
    return out;
}

namespace detail {

std::vector<MethodPairing> pair_methods(const std::vector<const MethodDeclarationInfo*>& lefts,
                                        const std::vector<const MethodDeclarationInfo*>& rights, const Config& config,
                                        bool phase_two) {
    std::vector<MethodPairing> out;
    std::set<const MethodDeclarationInfo*> used_l, used_r;
    for (const auto* r : rights) {
        for (const auto* l : lefts) {
            if (used_l.count(l) || !l->same_signature(*r)) continue;
            MethodPairing p;
            p.kind = PairingKind::identical_signature;
            p.left = {l};
            p.right = {r};
            p.mapping = map_methods(*l, *r, config);
            p.score = match_score(*l, *r, p.mapping);
            used_l.insert(l);
            used_r.insert(r);
            out.push_back(std::move(p));
            break;
        }
    }
    if (!phase_two) return out;

    struct Candidate {
        const MethodDeclarationInfo* l;
        const MethodDeclarationInfo* r;
        double score;
        std::size_t replacements;
        MappingSet mapping;
    };
    std::vector<Candidate> cands;
    for (const auto* l : lefts) {
        if (used_l.count(l)) continue;
        for (const auto* r : rights) {
            if (used_r.count(r)) continue;
            MappingSet m;
            try {
                m = map_methods(*l, *r, config);
            } catch (const stmtmap::SizeLimit&) {
                continue;
            }
            const double s = match_score(*l, *r, m);
            if (s > config.method_match_score) cands.push_back({l, r, s, replacement_count(m), std::move(m)});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.replacements != b.replacements) return a.replacements < b.replacements;
        if (a.l->signature() != b.l->signature()) return a.l->signature() < b.l->signature();
        return a.r->signature() < b.r->signature();
    });
    for (auto& c : cands) {
        if (used_l.count(c.l) || used_r.count(c.r)) continue;
        used_l.insert(c.l);
        used_r.insert(c.r);
        MethodPairing p;
        p.kind = PairingKind::signature_changed;
        p.left = {c.l};
        p.right = {c.r};
        p.mapping = std::move(c.mapping);
        p.score = c.score;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<const MethodDeclarationInfo*> methods_of(const TypeDeclarationInfo& t, const PruneSet* pruned) {
    std::vector<const MethodDeclarationInfo*> out;
    for (const auto& m : t.methods) {
        if (!pruned || !pruned->count(&m)) out.push_back(&m);
    }
    return out;
}

}  // namespace detail

std::vector<MethodPairing> match_methods(const TypeDeclarationInfo& left, const TypeDeclarationInfo& right,
                                         const Config& config, const PruneSet* pruned) {
    return pair_methods(methods_of(left, pruned), methods_of(right, pruned), config, true);
}

std::vector<const MethodDeclarationInfo*> unpaired_left(const TypeDeclarationInfo& left,
                                                        const std::vector<MethodPairing>& pairings,
                                                        const PruneSet* pruned) {
    std::vector<const MethodDeclarationInfo*> out;
    for (const auto* m : methods_of(left, pruned)) {
        bool used = std::any_of(pairings.begin(), pairings.end(), [&](const MethodPairing& p) { return p.involves_left(m); });
        if (!used) out.push_back(m);
    }
    return out;
}

std::vector<const MethodDeclarationInfo*> unpaired_right(const TypeDeclarationInfo& right,
                                                         const std::vector<MethodPairing>& pairings,
                                                         const PruneSet* pruned) {
    std::vector<const MethodDeclarationInfo*> out;
    for (const auto* m : methods_of(right, pruned)) {
        bool used =
            std::any_of(pairings.begin(), pairings.end(), [&](const MethodPairing& p) { return p.involves_right(m); });
        if (!used) out.push_back(m);
    }
    return out;
}

namespace detail {

/// Fraction of `side` nodes matched in `m`.
double coverage(const std::vector<const StatementNode*>& side, const MappingSet& m, bool left_side) {
    if (side.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto* n : side) {
        const bool matched = left_side ? (m.for_left(n) || m.multi_for_left(n)) : (m.for_right(n) || m.multi_for_right(n));
        if (matched) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(side.size());
}

std::optional<MappingSet> try_map(const std::vector<const StatementNode*>& l, const std::vector<const StatementNode*>& r,
                                  const Config& config) {
    if (l.empty() || r.empty()) return std::nullopt;
    try {
        return stmtmap::map_statements(l, r, config.mapper);
    } catch (const stmtmap::SizeLimit&) {
        return std::nullopt;
    }
}

std::vector<const StatementNode*> subtree_nodes(const std::vector<const StatementNode*>& roots) {
    std::vector<const StatementNode*> out;
    for (const auto* r : roots) {
        auto pre = r->preorder();
        out.insert(out.end(), pre.begin(), pre.end());
    }
    return out;
}

bool anyone_calls(const std::vector<const MethodDeclarationInfo*>& callers, const MethodDeclarationInfo& target) {
    for (const auto* c : callers) {
        if (c != &target && calls(*c, target.name)) return true;
    }
    return false;
}

std::vector<MethodPairing> fragment_pairings(std::vector<MethodPairing>& pairings,
                                             std::vector<const MethodDeclarationInfo*>& free_left,
                                             std::vector<const MethodDeclarationInfo*>& free_right,
                                             const std::vector<const MethodDeclarationInfo*>& all_left,
                                             const std::vector<const MethodDeclarationInfo*>& all_right,
                                             const Config& config, PairingKind extract_kind) {
    std::vector<MethodPairing> found;
    auto erase = [](std::vector<const MethodDeclarationInfo*>& v, const MethodDeclarationInfo* m) {
        v.erase(std::remove(v.begin(), v.end(), m), v.end());
    };

    // Merge: several left methods (one of them possibly already paired by
    // signature change) whose bodies land in one right method.
    auto merge_or_split = [&](bool merge) {
        std::vector<const MethodDeclarationInfo*> singles = merge ? free_right : free_left;
        for (auto& p : pairings) {
            if (p.kind == PairingKind::signature_changed) singles.push_back(merge ? p.right[0] : p.left[0]);
        }
        std::sort(singles.begin(), singles.end(),
                  [](auto* a, auto* b) { return a->signature() < b->signature(); });
        for (const auto* single : singles) {
            auto existing = std::find_if(pairings.begin(), pairings.end(), [&](const MethodPairing& p) {
                return p.kind == PairingKind::signature_changed &&
                       (merge ? p.right[0] == single : p.left[0] == single);
            });
            std::vector<const StatementNode*> free_nodes;
            if (existing != pairings.end()) {
                free_nodes = unmatched_roots(merge ? existing->mapping.unmatched_right : existing->mapping.unmatched_left);
            } else {
                if (std::find((merge ? free_right : free_left).begin(), (merge ? free_right : free_left).end(), single) ==
                    (merge ? free_right : free_left).end()) {
                    continue;
                }
                free_nodes = body_roots(*single);
            }
            if (free_nodes.empty()) continue;
            std::vector<const MethodDeclarationInfo*> group;
            for (const auto* other : merge ? free_left : free_right) {
                auto roots = body_roots(*other);
                auto m = merge ? try_map(roots, free_nodes, config) : try_map(free_nodes, roots, config);
                if (!m) continue;
                if (coverage(body_nodes(*other), *m, merge) >= config.fragment_coverage) group.push_back(other);
            }
            const std::size_t arity = group.size() + (existing != pairings.end() ? 1 : 0);
            if (group.empty() || arity < 2) continue;
            MethodPairing mp;
            mp.kind = merge ? PairingKind::merged : PairingKind::split;
            std::vector<const MethodDeclarationInfo*> many;
            if (existing != pairings.end()) many.push_back(merge ? existing->left[0] : existing->right[0]);
            many.insert(many.end(), group.begin(), group.end());
            std::sort(many.begin(), many.end(), [](auto* a, auto* b) { return a->start_line < b->start_line; });
            std::vector<const StatementNode*> many_roots;
            for (const auto* m : many) {
                auto roots = body_roots(*m);
                many_roots.insert(many_roots.end(), roots.begin(), roots.end());
            }
            auto joint = merge ? try_map(many_roots, body_roots(*single), config)
                               : try_map(body_roots(*single), many_roots, config);
            if (!joint) continue;
            mp.left = merge ? many : std::vector<const MethodDeclarationInfo*>{single};
            mp.right = merge ? std::vector<const MethodDeclarationInfo*>{single} : many;
            mp.mapping = std::move(*joint);
            mp.score = 1.0;
            if (existing != pairings.end()) pairings.erase(existing);
            for (const auto* g : group) erase(merge ? free_left : free_right, g);
            erase(merge ? free_right : free_left, single);
            found.push_back(std::move(mp));
        }
    };
    merge_or_split(true);
    merge_or_split(false);

    // Extract: a new right method receiving statements a surviving pair lost,
    // and called from the right side.
    for (const auto* r : std::vector<const MethodDeclarationInfo*>(free_right)) {
        bool any = false;
        const auto r_nodes = body_nodes(*r);
        if (r_nodes.empty() || !anyone_calls(all_right, *r)) continue;
        for (const auto& p : pairings) {
            if (p.left.size() != 1 || p.right.size() != 1) continue;
            auto lost = unmatched_roots(p.mapping.unmatched_left);
            auto m = try_map(lost, body_roots(*r), config);
            if (!m || m->mappings.empty()) continue;
            if (coverage(r_nodes, *m, false) < config.fragment_coverage) continue;
            MethodPairing mp;
            mp.kind = extract_kind;
            mp.left = p.left;
            mp.right = {r};
            mp.mapping = std::move(*m);
            mp.score = coverage(r_nodes, mp.mapping, false);
            found.push_back(std::move(mp));
            any = true;
        }
        if (any) erase(free_right, r);
    }

    // Inline: a removed left method whose statements a surviving pair gained,
    // called from the left side.
    if (extract_kind == PairingKind::extracted) {
        for (const auto* l : std::vector<const MethodDeclarationInfo*>(free_left)) {
            const auto l_nodes = body_nodes(*l);
            if (l_nodes.empty() || !anyone_calls(all_left, *l)) continue;
            bool any = false;
            for (const auto& p : pairings) {
                if (p.left.size() != 1 || p.right.size() != 1) continue;
                auto gained = unmatched_roots(p.mapping.unmatched_right);
                auto m = try_map(body_roots(*l), gained, config);
                if (!m || m->mappings.empty()) continue;
                if (coverage(l_nodes, *m, true) < config.fragment_coverage) continue;
                MethodPairing mp;
                mp.kind = PairingKind::inlined;
                mp.left = {l};
                mp.right = p.right;
                mp.mapping = std::move(*m);
                mp.score = coverage(l_nodes, mp.mapping, true);
                found.push_back(std::move(mp));
                any = true;
            }
            if (any) erase(free_left, l);
        }
    }
    return found;
}

}  // namespace detail

std::vector<MethodPairing> detect_intra_file(const std::vector<const TypeDeclarationInfo*>& left_types,
                                             const std::vector<const TypeDeclarationInfo*>& right_types,
                                             std::vector<MethodPairing>& pairings, const Config& config,
                                             const PruneSet* pruned) {
    std::vector<const MethodDeclarationInfo*> all_left, all_right, free_left, free_right;
    for (const auto* t : left_types) {
        auto ms = methods_of(*t, pruned);
        all_left.insert(all_left.end(), ms.begin(), ms.end());
        auto un = unpaired_left(*t, pairings, pruned);
        free_left.insert(free_left.end(), un.begin(), un.end());
    }
    for (const auto* t : right_types) {
        auto ms = methods_of(*t, pruned);
        all_right.insert(all_right.end(), ms.begin(), ms.end());
        auto un = unpaired_right(*t, pairings, pruned);
        free_right.insert(free_right.end(), un.begin(), un.end());
    }
    return fragment_pairings(pairings, free_left, free_right, all_left, all_right, config, PairingKind::extracted);
}

std::vector<MethodPairing> diff_file(const srcmodel::CompilationUnit* left, const srcmodel::CompilationUnit* right,
                                     const Config& config, const PruneSet* pruned) {
    std::vector<MethodPairing> pairings;
    if (!left || !right) return pairings;
    std::vector<const TypeDeclarationInfo*> lt, rt;
    for (const auto& t : left->types) lt.push_back(&t);
    for (const auto& t : right->types) rt.push_back(&t);
    for (const auto* r : rt) {
        for (const auto* l : lt) {
            if (l->key() != r->key()) continue;
            auto ps = match_methods(*l, *r, config, pruned);
            for (auto& p : ps) pairings.push_back(std::move(p));
        }
    }
    auto extra = detect_intra_file(lt, rt, pairings, config, pruned);
    for (auto& p : extra) pairings.push_back(std::move(p));
    return pairings;
}

}  // namespace blocktrace::refdetect
