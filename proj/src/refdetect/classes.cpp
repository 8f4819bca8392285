#include "blocktrace/refdetect.hpp"
#include "detail.hpp"

#include <algorithm>
#include <map>

namespace blocktrace::refdetect {

using namespace detail;

std::string to_string(ClassPairingKind kind) {
    switch (kind) {
        case ClassPairingKind::moved: return "moved";
        case ClassPairingKind::renamed: return "renamed";
        case ClassPairingKind::extracted: return "extracted";
        case ClassPairingKind::merged: return "merged";
        case ClassPairingKind::split: return "split";
    }
    return "moved";
}

namespace {

/// Members of `a` that have a counterpart in `b`: same overload key, same
/// non-empty body, or same field name.
std::size_t shared_members(const TypeDeclarationInfo& a, const TypeDeclarationInfo& b, const PruneSet* pruned) {
    std::size_t n = 0;
    auto bm = methods_of(b, pruned);
    for (const auto* m : methods_of(a, pruned)) {
        for (const auto* o : bm) {
            if (m->overload_key() == o->overload_key() || (!m->body_text.empty() && m->body_text == o->body_text)) {
                ++n;
                break;
            }
        }
    }
    for (const auto& f : a.field_names) {
        if (std::find(b.field_names.begin(), b.field_names.end(), f) != b.field_names.end()) ++n;
    }
    return n;
}

std::size_t member_count(const TypeDeclarationInfo& t, const PruneSet* pruned) {
    return methods_of(t, pruned).size() + t.field_names.size();
}

double overlap_of_smaller(const TypeDeclarationInfo& a, const TypeDeclarationInfo& b, const PruneSet* pruned) {
    const std::size_t denom = std::min(member_count(a, pruned), member_count(b, pruned));
    if (denom == 0) return 0.0;
    return static_cast<double>(std::min(shared_members(a, b, pruned), denom)) / static_cast<double>(denom);
}

double overlap_of(const TypeDeclarationInfo& part, const TypeDeclarationInfo& whole, const PruneSet* pruned) {
    const std::size_t denom = member_count(part, pruned);
    if (denom == 0) return 0.0;
    return static_cast<double>(std::min(shared_members(part, whole, pruned), denom)) / static_cast<double>(denom);
}

bool by_key(const TypeDeclarationInfo* a, const TypeDeclarationInfo* b) { return a->key() < b->key(); }

std::vector<MethodPairing> pair_members(const std::vector<const TypeDeclarationInfo*>& left,
                                        const std::vector<const TypeDeclarationInfo*>& right, const Config& config,
                                        const PruneSet* pruned) {
    std::vector<const MethodDeclarationInfo*> lm, rm;
    for (const auto* t : left) {
        auto ms = methods_of(*t, pruned);
        lm.insert(lm.end(), ms.begin(), ms.end());
    }
    for (const auto* t : right) {
        auto ms = methods_of(*t, pruned);
        rm.insert(rm.end(), ms.begin(), ms.end());
    }
    return pair_methods(lm, rm, config, true);
}

struct SurvivorDiff {
    const TypeDeclarationInfo* left;
    const TypeDeclarationInfo* right;
    std::vector<MethodPairing> pairings;
};

std::vector<SurvivorDiff> survivors(const SourceModel& left, const SourceModel& right, const Config& config,
                                    const PruneSet* pruned) {
    std::vector<SurvivorDiff> out;
    for (const auto* r : right.types()) {
        if (const auto* l = left.find_type(r->key())) {
            out.push_back({l, r, match_methods(*l, *r, config, pruned)});
        }
    }
    return out;
}

}  // namespace

std::vector<ClassPairing> detect_class_level(const SourceModel& left, const SourceModel& right, const Config& config,
                                             const PruneSet* pruned) {
    std::vector<const TypeDeclarationInfo*> ul, ur;
    for (const auto* t : left.types()) {
        if (!right.find_type(t->key())) ul.push_back(t);
    }
    for (const auto* t : right.types()) {
        if (!left.find_type(t->key())) ur.push_back(t);
    }
    std::sort(ul.begin(), ul.end(), by_key);
    std::sort(ur.begin(), ur.end(), by_key);

    std::vector<ClassPairing> out;
    std::set<const TypeDeclarationInfo*> used_l, used_r;

    // Split: one vanished type spread over several new ones.
    for (const auto* l : ul) {
        std::vector<const TypeDeclarationInfo*> parts;
        for (const auto* r : ur) {
            if (!used_r.count(r) && overlap_of(*r, *l, pruned) > config.class_member_overlap) parts.push_back(r);
        }
        if (parts.size() < 2) continue;
        ClassPairing cp{ClassPairingKind::split, {l}, parts, pair_members({l}, parts, config, pruned)};
        used_l.insert(l);
        used_r.insert(parts.begin(), parts.end());
        out.push_back(std::move(cp));
    }
    // Merge: several vanished types folded into one new type.
    for (const auto* r : ur) {
        if (used_r.count(r)) continue;
        std::vector<const TypeDeclarationInfo*> parts;
        for (const auto* l : ul) {
            if (!used_l.count(l) && overlap_of(*l, *r, pruned) > config.class_member_overlap) parts.push_back(l);
        }
        if (parts.size() < 2) continue;
        ClassPairing cp{ClassPairingKind::merged, parts, {r}, pair_members(parts, {r}, config, pruned)};
        used_r.insert(r);
        used_l.insert(parts.begin(), parts.end());
        out.push_back(std::move(cp));
    }
    // Move: same simple name chain, different package or source folder.
    for (const auto* r : ur) {
        if (used_r.count(r)) continue;
        for (const auto* l : ul) {
            if (used_l.count(l) || l->type_chain() != r->type_chain()) continue;
            ClassPairing cp{ClassPairingKind::moved, {l}, {r}, pair_members({l}, {r}, config, pruned)};
            used_l.insert(l);
            used_r.insert(r);
            out.push_back(std::move(cp));
            break;
        }
    }
    // Rename: different name, majority of the smaller member set shared.
    for (const auto* r : ur) {
        if (used_r.count(r)) continue;
        const TypeDeclarationInfo* best = nullptr;
        double best_overlap = config.class_member_overlap;
        for (const auto* l : ul) {
            if (used_l.count(l)) continue;
            const double o = overlap_of_smaller(*l, *r, pruned);
            if (o > best_overlap) {
                best_overlap = o;
                best = l;
            }
        }
        if (!best) continue;
        ClassPairing cp{ClassPairingKind::renamed, {best}, {r}, pair_members({best}, {r}, config, pruned)};
        used_l.insert(best);
        used_r.insert(r);
        out.push_back(std::move(cp));
    }
    // Extract: a new type holding members that left a surviving type.
    auto kept = survivors(left, right, config, pruned);
    for (const auto* r : ur) {
        if (used_r.count(r)) continue;
        const auto r_methods = methods_of(*r, pruned);
        if (r_methods.empty()) continue;
        for (const auto& s : kept) {
            auto lost = unpaired_left(*s.left, s.pairings, pruned);
            if (lost.empty()) continue;
            auto pairs = pair_methods(lost, r_methods, config, true);
            if (static_cast<double>(pairs.size()) / static_cast<double>(r_methods.size()) < config.class_member_overlap ||
                pairs.empty()) {
                continue;
            }
            ClassPairing cp{ClassPairingKind::extracted, {s.left}, {r}, std::move(pairs)};
            used_r.insert(r);
            out.push_back(std::move(cp));
            break;
        }
    }
    return out;
}

std::vector<MethodPairing> detect_inter_file(const SourceModel& left, const SourceModel& right,
                                             const std::vector<ClassPairing>& classes, const Config& config,
                                             const PruneSet* pruned) {
    auto kept = survivors(left, right, config, pruned);
    std::set<const MethodDeclarationInfo*> explained_l, explained_r;
    std::vector<const MethodPairing*> anchors;  // pairs that may have lost statements
    for (const auto& s : kept) {
        for (const auto& p : s.pairings) {
            explained_l.insert(p.left.begin(), p.left.end());
            explained_r.insert(p.right.begin(), p.right.end());
            anchors.push_back(&p);
        }
    }
    for (const auto& c : classes) {
        for (const auto& p : c.methods) {
            explained_l.insert(p.left.begin(), p.left.end());
            explained_r.insert(p.right.begin(), p.right.end());
            anchors.push_back(&p);
        }
    }
    std::vector<const MethodDeclarationInfo*> free_l, free_r, all_r;
    for (const auto* t : left.types()) {
        for (const auto* m : methods_of(*t, pruned)) {
            if (!explained_l.count(m)) free_l.push_back(m);
        }
    }
    for (const auto* t : right.types()) {
        for (const auto* m : methods_of(*t, pruned)) {
            all_r.push_back(m);
            if (!explained_r.count(m)) free_r.push_back(m);
        }
    }

    std::vector<MethodPairing> out;
    // Whole-method moves, ranked like signature changes.
    auto moves = pair_methods(free_l, free_r, config, true);
    for (auto& p : moves) {
        const auto* lt = p.left[0]->container;
        const auto* rt = p.right[0]->container;
        if (lt && rt && lt->key() == rt->key()) continue;  // same type, not a move
        auto has = [](const std::vector<std::string>& v, const std::string& s) {
            return std::find(v.begin(), v.end(), s) != v.end();
        };
        if (lt && rt && has(lt->extends, rt->name)) p.kind = PairingKind::pulled_up;
        else if (lt && rt && has(rt->extends, lt->name)) p.kind = PairingKind::pushed_down;
        else p.kind = PairingKind::moved;
        free_l.erase(std::remove(free_l.begin(), free_l.end(), p.left[0]), free_l.end());
        free_r.erase(std::remove(free_r.begin(), free_r.end(), p.right[0]), free_r.end());
        out.push_back(std::move(p));
    }
    // Extract and move: a fragment of an anchored pair lands in a method of another file.
    for (const auto* r : std::vector<const MethodDeclarationInfo*>(free_r)) {
        const auto r_nodes = body_nodes(*r);
        if (r_nodes.empty()) continue;
        for (const auto* a : anchors) {
            if (a->left.size() != 1 || a->right.size() != 1) continue;
            const auto* at = a->right[0]->container;
            if (at && r->container && at->path == r->container->path) continue;
            if (!calls(*a->right[0], r->name)) continue;
            auto m = try_map(unmatched_roots(a->mapping.unmatched_left), body_roots(*r), config);
            if (!m || m->mappings.empty() || coverage(r_nodes, *m, false) < config.fragment_coverage) continue;
            MethodPairing mp;
            mp.kind = PairingKind::extracted_and_moved;
            mp.left = a->left;
            mp.right = {r};
            mp.score = coverage(r_nodes, *m, false);
            mp.mapping = std::move(*m);
            out.push_back(std::move(mp));
        }
    }
    return out;
}

}  // namespace blocktrace::refdetect
