#include "blocktrace/tracker.hpp"
#include "detail.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <unordered_map>

namespace blocktrace::tracker {

using refdetect::MethodPairing;
using refdetect::PairingKind;
using srcmodel::CompilationUnit;
using srcmodel::MethodDeclarationInfo;
using srcmodel::StatementNode;
using srcmodel::TypeDeclarationInfo;

std::vector<const HistoryEdge*> ChangeHistoryGraph::incoming(std::size_t i) const {
    std::vector<const HistoryEdge*> out;
    for (const auto& e : edges) {
        if (e.to == i) out.push_back(&e);
    }
    return out;
}

namespace {

struct Located {
    const StatementNode* block{nullptr};
    const MethodDeclarationInfo* method{nullptr};
};

std::string key_of(const StatementNode& b, const MethodDeclarationInfo& m) {
    return srcmodel::block_identifier(b, m, "").key();
}

std::string signature_field(const std::string& key) {
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        pos = key.find('|', pos);
        if (pos == std::string::npos) return {};
        ++pos;
    }
    return key.substr(pos, key.find('|', pos) - pos);
}

std::optional<Located> find_in_method(const MethodDeclarationInfo& m, const std::string& key) {
    if (!m.body) return std::nullopt;
    for (const auto* n : m.body->preorder()) {
        if (n->parent && key_of(*n, m) == key) return Located{n, &m};
    }
    return std::nullopt;
}

std::optional<Located> find_key(const CompilationUnit& u, const std::string& key) {
    const std::string sig = signature_field(key);
    for (const auto& t : u.types) {
        for (const auto& m : t.methods) {
            if (m.signature() != sig) continue;
            if (auto l = find_in_method(m, key)) return l;
        }
    }
    return std::nullopt;
}

const TypeDeclarationInfo* type_with_key(const CompilationUnit& u, const std::string& key) {
    for (const auto& t : u.types) {
        if (t.key() == key) return &t;
    }
    return nullptr;
}

const MethodDeclarationInfo* same_signature(const TypeDeclarationInfo& t, const MethodDeclarationInfo& m) {
    for (const auto& o : t.methods) {
        if (o.same_signature(m)) return &o;
    }
    return nullptr;
}

struct Link {
    std::string path;
    std::string key;
    std::vector<Change> changes;
};

struct Resolution {
    std::string step;
    StepCategory category{StepCategory::change};
    bool introduced{false};
    std::vector<Link> links;
};

struct Cursor {
    std::string path;
    std::string key;
    std::size_t at{0};  // position in the first-parent chain
    std::optional<std::size_t> pending;
    std::vector<Change> pending_changes;
};

class Session {
public:
    Session(const gitio::Repository& repo, const gitio::CommitRef& start, const TrackOptions& options)
        : repo_(repo), options_(options), chain_(repo.first_parent_chain(start)) {
        for (std::size_t i = 0; i < chain_.size(); ++i) pos_[chain_[i].id] = i;
    }

    TrackResult run(const std::string& path, const std::string& key) {
        std::vector<Cursor> work{{path, key, 0, std::nullopt, {}}};
        while (!work.empty()) {
            Cursor c = std::move(work.back());
            work.pop_back();
            follow(std::move(c), work);
        }
        return finish();
    }

private:
    const gitio::Repository& repo_;
    TrackOptions options_;
    std::vector<gitio::CommitRef> chain_;
    std::unordered_map<std::string, std::size_t> pos_;

    struct History {
        std::size_t from{0};
        std::vector<std::size_t> positions;  // newest first
    };
    std::map<std::string, History> histories_;
    std::map<std::pair<std::string, std::uint64_t>, std::shared_ptr<const CompilationUnit>> parsed_;
    std::map<std::pair<std::string, std::uint64_t>, srcmodel::ParseError> parse_errors_;

    std::vector<HistoryNode> nodes_;
    std::vector<HistoryEdge> edges_;
    std::map<std::pair<std::string, std::string>, std::size_t> node_index_;
    std::vector<std::string> diagnostics_;
    std::vector<EvolutionHook> hooks_;
    std::vector<StepRecord> steps_;

    const std::vector<std::size_t>& history(const std::string& path, std::size_t at) {
        auto it = histories_.find(path);
        if (it == histories_.end() || it->second.from > at) {
            History h;
            h.from = at;
            try {
                for (const auto& c : repo_.file_history(path, chain_[at])) {
                    if (auto p = pos_.find(c.id); p != pos_.end()) h.positions.push_back(p->second);
                }
            } catch (const gitio::UnknownPath&) {
                // absent at `at`: leaves an empty history
            }
            it = histories_.insert_or_assign(path, std::move(h)).first;
        }
        return it->second.positions;
    }

    std::optional<std::size_t> next_change(const std::string& path, std::size_t at) {
        for (auto p : history(path, at)) {
            if (p >= at) return p;
        }
        return std::nullopt;
    }

    /// Parsed file at a chain position; nullptr when absent. Throws ParseError.
    std::shared_ptr<const CompilationUnit> parse(std::size_t at, const std::string& path) {
        auto text = repo_.read_file(chain_[at], path);
        if (!text) return nullptr;
        const auto key = std::make_pair(path, srcmodel::fnv1a(*text));
        if (auto it = parsed_.find(key); it != parsed_.end()) return it->second;
        if (auto it = parse_errors_.find(key); it != parse_errors_.end()) {
            throw it->second;
        }
        try {
            auto u = srcmodel::parse_file(*text, path);
            parsed_[key] = u;
            return u;
        } catch (const srcmodel::ParseError& e) {
            parse_errors_.emplace(key, e);
            throw;
        }
    }

    std::size_t node_for(std::size_t at, const Located& loc, bool& existed) {
        auto id = srcmodel::block_identifier(*loc.block, *loc.method, chain_[at].id);
        const std::string key = id.key();
        auto slot = std::make_pair(chain_[at].id, key);
        if (auto it = node_index_.find(slot); it != node_index_.end()) {
            existed = true;
            return it->second;
        }
        existed = false;
        nodes_.push_back({std::move(id), chain_[at], key});
        node_index_[slot] = nodes_.size() - 1;
        return nodes_.size() - 1;
    }

    void attach(const Cursor& c, std::size_t node) {
        if (c.pending) edges_.push_back({node, *c.pending, c.pending_changes});
    }

    void record(std::size_t at, const std::string& step, StepCategory cat,
                std::chrono::steady_clock::time_point t0) {
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        steps_.push_back({chain_[at].id, step, cat, ms});
    }

    void hook(std::size_t at, PairingKind kind, const std::string& path) {
        if (options_.emit_evolution_hooks) hooks_.push_back({chain_[at].id, refdetect::to_string(kind), path});
    }

    void follow(Cursor c, std::vector<Cursor>& work) {
        while (true) {
            auto r = next_change(c.path, c.at);
            if (!r) {
                diagnostics_.push_back("history of " + c.path + " ends above " + chain_[c.at].id.substr(0, 7));
                return;
            }
            const auto t0 = std::chrono::steady_clock::now();
            std::shared_ptr<const CompilationUnit> unit_r;
            try {
                unit_r = parse(*r, c.path);
            } catch (const srcmodel::ParseError& e) {
                diagnostics_.push_back(std::string("cannot parse tracked file: ") + e.what());
                return;
            }
            std::optional<Located> loc;
            if (unit_r) loc = find_key(*unit_r, c.key);
            if (!loc) {
                diagnostics_.push_back("tracked block lost at " + chain_[*r].id.substr(0, 7) + " in " + c.path);
                return;
            }
            if (*r + 1 >= chain_.size()) {
                bool existed = false;
                const auto n = node_for(*r, *loc, existed);
                attach(c, n);
                record(*r, "root", StepCategory::no_change, t0);
                return;
            }

            // Parent model, skipping over unparseable versions of the file.
            std::size_t p = *r + 1;
            std::shared_ptr<const CompilationUnit> unit_p;
            while (true) {
                try {
                    unit_p = parse(p, c.path);
                    break;
                } catch (const srcmodel::ParseError& e) {
                    diagnostics_.push_back("skipped unparseable version at " + chain_[p].id.substr(0, 7) + ": " +
                                           e.what());
                    auto older = next_change(c.path, p);
                    if (!older || *older + 1 >= chain_.size()) {
                        unit_p = nullptr;
                        break;
                    }
                    p = *older + 1;
                }
            }

            Resolution res = resolve(*r, p, c.path, *unit_r, *loc, unit_p.get());
            record(*r, res.step, res.category, t0);

            if (res.introduced) {
                bool existed = false;
                const auto n = node_for(*r, *loc, existed);
                attach(c, n);
                if (!existed) edges_.push_back({std::nullopt, n, {describe(ChangeType::introduced, loc->block->block_type(),
                                                                           "The block was introduced")}});
                return;
            }
            const bool bearing = res.links.size() > 1 ||
                                 std::any_of(res.links.begin(), res.links.end(),
                                             [](const Link& l) { return !l.changes.empty(); });
            if (!bearing) {
                c.path = res.links.front().path;
                c.key = res.links.front().key;
                c.at = p;
                continue;
            }
            bool existed = false;
            const auto n = node_for(*r, *loc, existed);
            attach(c, n);
            if (existed) return;
            for (std::size_t i = res.links.size(); i-- > 1;) {
                work.push_back({res.links[i].path, res.links[i].key, p, n, res.links[i].changes});
            }
            c = Cursor{res.links[0].path, res.links[0].key, p, n, res.links[0].changes};
        }
    }

    /// Links for the partner(s) of `b` in `m`; `owners` are the methods whose
    /// bodies hold the left side of the mapping.
    std::vector<Link> links_from(const stmtmap::MappingSet& m, const StatementNode* b,
                                 const std::vector<const MethodDeclarationInfo*>& owners) {
        std::vector<Link> out;
        auto link = [&](const StatementNode* left, std::vector<Change> changes) {
            for (const auto* o : owners) {
                if (!o->body || !left->is_descendant_of(*o->body) || left == o->body.get()) continue;
                out.push_back({o->container ? o->container->path : std::string(), key_of(*left, *o), std::move(changes)});
                return;
            }
        };
        const std::string type = b->block_type();
        for (const auto& br : refdetect::detect_body_refactorings(m)) {
            if (std::find(br.right.begin(), br.right.end(), b) == br.right.end()) continue;
            switch (br.kind) {
                case refdetect::BodyRefactoringKind::split_conditional:
                    link(br.left.front(), {describe(ChangeType::block_split, type,
                                                    "The " + type + " block was split from a compound condition")});
                    break;
                case refdetect::BodyRefactoringKind::merge_conditional:
                case refdetect::BodyRefactoringKind::merge_catch:
                    for (const auto* l : br.left) {
                        link(l, {describe(ChangeType::block_merge, type, "Several " + type + " blocks were merged")});
                    }
                    break;
                case refdetect::BodyRefactoringKind::replace_loop_with_pipeline:
                    link(br.left.front(), {describe(ChangeType::replace_loop_with_pipeline, type,
                                                    "The " + br.left.front()->block_type() +
                                                        " loop was replaced with a pipeline")});
                    break;
                case refdetect::BodyRefactoringKind::replace_pipeline_with_loop:
                    link(br.left.front(), {describe(ChangeType::replace_pipeline_with_loop, type,
                                                    "The pipeline was replaced with a " + type + " loop")});
                    break;
                case refdetect::BodyRefactoringKind::invert_condition:
                    break;
            }
            if (!out.empty()) return out;
        }
        if (const auto* partner = m.partner_of_right(b)) link(partner, classify_changes(*partner, *b, m));
        return out;
    }

    static void mark_merge(std::vector<Link>& links, const std::string& type) {
        if (links.size() < 2) return;
        for (auto& l : links) {
            const bool has = std::any_of(l.changes.begin(), l.changes.end(),
                                         [](const Change& c) { return c.type == ChangeType::block_merge; });
            if (!has) {
                l.changes.insert(l.changes.begin(),
                                 describe(ChangeType::block_merge, type, "The " + type + " block was merged from duplicates"));
            }
        }
    }

    Resolution resolve(std::size_t r, std::size_t p, const std::string& path, const CompilationUnit& unit_r,
                       const Located& loc, const CompilationUnit* unit_p) {
        const auto& cfg = options_.config;
        const auto* mr = loc.method;
        const auto* tr = mr->container;
        const std::string type = loc.block->block_type();

        std::optional<std::vector<MethodPairing>> file_diff;
        auto diff = [&]() -> const std::vector<MethodPairing>& {
            if (!file_diff) {
                try {
                    file_diff = refdetect::diff_file(unit_p, &unit_r, cfg);
                } catch (const stmtmap::SizeLimit& e) {
                    diagnostics_.push_back(std::string("file diff skipped: ") + e.what());
                    file_diff.emplace();
                }
            }
            return *file_diff;
        };

        if (unit_p) {
            const auto* tp = type_with_key(*unit_p, tr->key());
            const auto* mp = tp ? same_signature(*tp, *mr) : nullptr;
            // Step 2: container method unchanged.
            if (mp && mp->body_hash == mr->body_hash && mp->body_text == mr->body_text) {
                if (auto l = find_in_method(*mp, key_of(*loc.block, *mr))) {
                    return {"step2", StepCategory::no_change, false, {{path, key_of(*l->block, *mp), {}}}};
                }
            }
            // Step 3: same signature, body changed.
            if (mp) {
                stmtmap::MappingSet m;
                try {
                    m = stmtmap::map_bodies(*mp, *mr, cfg.mapper);
                } catch (const stmtmap::SizeLimit& e) {
                    diagnostics_.push_back(std::string("body mapping skipped: ") + e.what());
                }
                auto links = links_from(m, loc.block, {mp});
                if (!links.empty()) return {"step3", StepCategory::change, false, std::move(links)};
                for (const auto& pr : diff()) {
                    if (pr.kind != PairingKind::inlined || !pr.involves_right(mr)) continue;
                    auto in = links_from(pr.mapping, loc.block, pr.left);
                    links.insert(links.end(), in.begin(), in.end());
                }
                if (!links.empty()) return {"step3", StepCategory::change, false, std::move(links)};
                return {"step3", StepCategory::change, true, {}};
            }
            // Step 4: signature changed or intra-file refactoring.
            std::vector<Link> links;
            for (const auto& pr : diff()) {
                if (!pr.involves_right(mr)) continue;
                if (pr.kind != PairingKind::signature_changed && pr.kind != PairingKind::extracted &&
                    pr.kind != PairingKind::merged && pr.kind != PairingKind::split) {
                    continue;
                }
                auto found = links_from(pr.mapping, loc.block, pr.left);
                if (!found.empty() && (pr.kind == PairingKind::extracted || pr.kind == PairingKind::split)) {
                    hook(r, pr.kind, path);
                }
                links.insert(links.end(), found.begin(), found.end());
            }
            if (!links.empty()) {
                mark_merge(links, type);
                return {"step4", StepCategory::change, false, std::move(links)};
            }
        }
        return step5(r, p, path, loc);
    }

    Resolution step5(std::size_t r, std::size_t p, const std::string& path, const Located& loc) {
        const auto& cfg = options_.config;
        const auto* tr = loc.method->container;
        refdetect::AugmentTarget target{tr->name, tr->package, loc.method->name};
        auto aug = refdetect::augment_models(repo_, chain_[r], chain_[p], {path}, target, cfg);
        for (auto& d : aug.diagnostics) diagnostics_.push_back(std::move(d));

        const std::string key = key_of(*loc.block, *loc.method);
        const auto* unit = aug.right.file(path);
        const TypeDeclarationInfo* t = unit ? type_with_key(*unit, tr->key()) : nullptr;
        const MethodDeclarationInfo* m = t ? same_signature(*t, *loc.method) : nullptr;
        auto b = m ? find_in_method(*m, key) : std::nullopt;
        if (!b) return {"step5", StepCategory::move, true, {}};

        const auto classes = refdetect::detect_class_level(aug.left, aug.right, cfg, &aug.pruned);
        std::vector<Link> links;
        for (const auto& cp : classes) {
            if (std::find(cp.right.begin(), cp.right.end(), t) == cp.right.end()) continue;
            for (const auto& pr : cp.methods) {
                if (!pr.involves_right(m)) continue;
                auto found = links_from(pr.mapping, b->block, pr.left);
                links.insert(links.end(), found.begin(), found.end());
            }
        }
        if (!links.empty()) {
            mark_merge(links, loc.block->block_type());
            return {"step5a", StepCategory::move, false, std::move(links)};
        }
        for (const auto& pr : refdetect::detect_inter_file(aug.left, aug.right, classes, cfg, &aug.pruned)) {
            if (!pr.involves_right(m)) continue;
            auto found = links_from(pr.mapping, b->block, pr.left);
            if (!found.empty()) hook(r, pr.kind, path);
            links.insert(links.end(), found.begin(), found.end());
        }
        if (!links.empty()) {
            mark_merge(links, loc.block->block_type());
            return {"step5b", StepCategory::move, false, std::move(links)};
        }
        return {"step5", StepCategory::move, true, {}};
    }

    TrackResult finish() {
        std::vector<std::size_t> order(nodes_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pos_.at(nodes_[a].commit.id) < pos_.at(nodes_[b].commit.id);
        });
        std::vector<std::size_t> remap(nodes_.size());
        TrackResult out;
        for (std::size_t i = 0; i < order.size(); ++i) {
            remap[order[i]] = i;
            out.graph.nodes.push_back(std::move(nodes_[order[i]]));
        }
        for (auto& e : edges_) {
            if (e.from) e.from = remap[*e.from];
            e.to = remap[e.to];
            out.graph.edges.push_back(std::move(e));
        }
        std::stable_sort(out.graph.edges.begin(), out.graph.edges.end(), [](const HistoryEdge& a, const HistoryEdge& b) {
            return a.to < b.to;
        });
        out.graph.start = nodes_.empty() ? 0 : remap[0];
        out.graph.diagnostics = std::move(diagnostics_);
        out.graph.hooks = std::move(hooks_);
        out.steps = std::move(steps_);
        return out;
    }
};

}  // namespace

TrackResult track_from(const gitio::Repository& repo, const gitio::CommitRef& commit, const std::string& file_path,
                       const std::string& block_key, const TrackOptions& options) {
    auto text = repo.read_file(commit, file_path);
    if (!text) throw srcmodel::CodeElementNotFound("no file " + file_path + " at " + commit.id);
    auto unit = srcmodel::parse_file(*text, file_path);
    if (!find_key(*unit, block_key)) {
        throw srcmodel::CodeElementNotFound("no block " + block_key + " in " + file_path + " at " + commit.id);
    }
    Session s(repo, commit, options);
    return s.run(file_path, block_key);
}

TrackResult track_session(const gitio::Repository& repo, const std::string& file_path, const std::string& block_type,
                          int start_line, const std::string& start_commit, const TrackOptions& options) {
    const auto commit = repo.resolve(start_commit);
    auto text = repo.read_file(commit, file_path);
    if (!text) throw srcmodel::CodeElementNotFound("no file " + file_path + " at " + commit.id);
    srcmodel::SourceModel model;
    model.commit = commit.id;
    model.files[file_path] = srcmodel::parse_file(*text, file_path);
    const auto loc = srcmodel::locate_block(model, file_path, block_type, start_line);
    const auto key = srcmodel::block_identifier(*loc.block, *loc.method, commit.id).key();
    Session s(repo, commit, options);
    return s.run(file_path, key);
}

ChangeHistoryGraph track(const gitio::Repository& repo, const std::string& file_path, const std::string& block_type,
                         int start_line, const std::string& start_commit, const TrackOptions& options) {
    return track_session(repo, file_path, block_type, start_line, start_commit, options).graph;
}

}  // namespace blocktrace::tracker
