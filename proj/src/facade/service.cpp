#include "blocktrace/facade.hpp"

#include "blocktrace/java_lexer.hpp"
#include "blocktrace/srcmodel.hpp"
#include "blocktrace/stmtmap.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <set>

namespace blocktrace::facade {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw HttpError(422, std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw HttpError(422, std::string("field '") + name + "' has the wrong type");
    }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* name) {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    return required<T>(j, name);
}

bool looks_like_url(const std::string& s) {
    return s.find("://") != std::string::npos || s.rfind("git@", 0) == 0;
}

std::string random_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    return buf;
}

/// Directory name for a clone: last path segment plus a hash of the URL.
std::string clone_dir_name(const std::string& url) {
    std::string base = url.substr(url.find_last_of("/:") + 1);
    if (base.size() > 4 && base.compare(base.size() - 4, 4, ".git") == 0) base.resize(base.size() - 4);
    std::erase_if(base, [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_'; });
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(srcmodel::fnv1a(url)));
    return (base.empty() ? "repo" : base) + "-" + std::string(hash, 8);
}

json decision_json(const Decision& d) {
    json j = {{"commitId", d.commit_id}, {"verdict", d.verdict}};
    if (d.correction) {
        j["correction"] = {{"file", d.correction->file}, {"blockType", d.correction->block_type},
                           {"line", d.correction->line}};
    }
    return j;
}

const srcmodel::StatementNode* locate(const gitio::Repository& repo, const tracker::HistoryNode& node,
                                      srcmodel::SourceModel& model) {
    model = srcmodel::build_partial_model(repo, node.commit, {node.element.path});
    return srcmodel::locate_block(model, node.element.path, node.element.block_type, node.element.start_line).block;
}

}  // namespace

const std::vector<std::string>& supported_block_types() {
    static const std::vector<std::string> types = [] {
        std::vector<std::string> out;
        for (auto k : srcmodel::trackable_kinds()) out.push_back(srcmodel::to_string(k));
        out.push_back("pipeline");
        return out;
    }();
    return types;
}

TrackRequest parse_track_request(const json& j) {
    if (!j.is_object()) throw HttpError(422, "request must be a JSON object");
    TrackRequest r;
    r.repo_path = optional_field<std::string>(j, "repoPath");
    r.clone_url = optional_field<std::string>(j, "cloneUrl");
    if (r.repo_path.has_value() == r.clone_url.has_value()) {
        throw HttpError(422, "exactly one of repoPath and cloneUrl is required");
    }
    r.commit = optional_field<std::string>(j, "commit").value_or("HEAD");
    r.file_path = required<std::string>(j, "filePath");
    r.block_type = required<std::string>(j, "blockType");
    r.line = required<int>(j, "line");
    const auto& types = supported_block_types();
    if (std::find(types.begin(), types.end(), r.block_type) == types.end()) {
        throw HttpError(422, "unsupported blockType '" + r.block_type + "'");
    }
    if (r.line < 1) throw HttpError(422, "line must be positive");
    return r;
}

json to_json(const TrackRequest& r) {
    json j = {{"commit", r.commit}, {"filePath", r.file_path}, {"blockType", r.block_type}, {"line", r.line}};
    if (r.repo_path) j["repoPath"] = *r.repo_path;
    if (r.clone_url) j["cloneUrl"] = *r.clone_url;
    return j;
}

std::string graph_payload(const tracker::ChangeHistoryGraph& graph) { return tracker::to_json(graph).dump(2) + "\n"; }

std::string element_type(const gitio::Repository& repo, const gitio::CommitRef& commit, const std::string& path,
                         int line, const std::string& selection) {
    const auto model = srcmodel::build_partial_model(repo, commit, {path});
    const auto blocks = srcmodel::blocks_at_line(model, path, line);
    if (blocks.empty()) return "invalid";
    std::string word = selection;
    std::erase_if(word, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (word.empty()) return blocks.front().block->block_type();
    static const std::map<std::string, std::set<std::string>> kinds = {
        {"if", {"if"}},         {"for", {"for", "enhanced-for"}}, {"while", {"while"}},   {"do", {"do-while"}},
        {"try", {"try"}},       {"catch", {"catch"}},            {"finally", {"finally"}}, {"switch", {"switch"}},
        {"synchronized", {"synchronized"}}, {"forEach", {"pipeline"}}, {"stream", {"pipeline"}}};
    auto it = kinds.find(word);
    if (it == kinds.end()) return "invalid";
    for (const auto& b : blocks) {
        if (it->second.count(b.block->block_type())) return b.block->block_type();
    }
    return "invalid";
}

int status_for(const std::exception& e) {
    if (auto h = dynamic_cast<const HttpError*>(&e)) return h->status();
    if (dynamic_cast<const gitio::UnknownCommit*>(&e) || dynamic_cast<const gitio::UnknownPath*>(&e) ||
        dynamic_cast<const srcmodel::CodeElementNotFound*>(&e)) {
        return 404;
    }
    if (dynamic_cast<const srcmodel::ParseError*>(&e) || dynamic_cast<const gitio::DecodeError*>(&e) ||
        dynamic_cast<const tracker::WireFormatError*>(&e) || dynamic_cast<const evalkit::OracleFormatError*>(&e)) {
        return 422;
    }
    return 500;
}

Decision parse_decision(const json& j) {
    Decision d;
    d.commit_id = required<std::string>(j, "commitId");
    d.verdict = required<std::string>(j, "verdict");
    if (d.verdict != "confirm" && d.verdict != "reject") throw HttpError(422, "verdict must be confirm or reject");
    if (j.contains("correction") && !j.at("correction").is_null()) {
        const auto& c = j.at("correction");
        d.correction = Correction{required<std::string>(c, "file"), required<std::string>(c, "blockType"),
                                  required<int>(c, "line")};
    }
    return d;
}

struct Service::Session {
    std::string id;
    TrackRequest request;
    tracker::ChangeHistoryGraph graph;
    std::vector<Decision> decisions;
    bool unresolved{false};
    std::mutex mutex;

    std::string state() const {
        if (unresolved) return "unresolved";
        std::set<std::string> confirmed;
        for (const auto& d : decisions) {
            if (d.verdict == "confirm") confirmed.insert(d.commit_id);
        }
        for (const auto& n : graph.nodes) {
            if (!confirmed.count(n.commit.id)) return "open";
        }
        return "confirmed";
    }
};

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    if (options_.sessions_dir.empty() || !std::filesystem::is_directory(options_.sessions_dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(options_.sessions_dir)) {
        if (entry.path().extension() != ".json") continue;
        try {
            std::ifstream in(entry.path());
            const auto j = json::parse(in);
            auto s = std::make_unique<Session>();
            s->id = j.at("id").get<std::string>();
            s->request = parse_track_request(j.at("request"));
            s->graph = tracker::graph_from_json(j.at("graph"));
            for (const auto& d : j.at("decisions")) s->decisions.push_back(parse_decision(d));
            s->unresolved = j.at("state") == "unresolved";
            sessions_[s->id] = std::move(s);
        } catch (const std::exception&) {
            // an unreadable checkpoint is skipped, not fatal
        }
    }
}

Service::~Service() = default;

std::shared_ptr<gitio::Repository> Service::open(const std::string& where, bool is_url) {
    std::lock_guard lock(mutex_);
    if (auto it = repos_.find(where); it != repos_.end()) return it->second;
    std::shared_ptr<gitio::Repository> repo;
    try {
        if (is_url) {
            std::filesystem::create_directories(options_.workspace);
            repo = std::make_shared<gitio::Repository>(
                gitio::Repository::clone_if_absent(where, options_.workspace / clone_dir_name(where)));
        } else {
            if (!std::filesystem::is_directory(where)) throw HttpError(404, "unknown repository " + where);
            repo = std::make_shared<gitio::Repository>(where);
        }
    } catch (const HttpError&) {
        throw;
    } catch (const gitio::GitError& e) {
        throw HttpError(404, std::string("unknown repository ") + where + ": " + e.what());
    }
    repos_[where] = repo;
    return repo;
}

std::shared_ptr<gitio::Repository> Service::open_request(const TrackRequest& r) {
    return r.clone_url ? open(*r.clone_url, true) : open(*r.repo_path, false);
}

json Service::element_type(const std::string& repo, const std::string& commit, const std::string& file, int line,
                           const std::string& selection) {
    if (repo.empty() || file.empty()) throw HttpError(422, "repo and file are required");
    auto r = open(repo, looks_like_url(repo));
    const auto ref = r->resolve(commit.empty() ? "HEAD" : commit);
    return {{"elementType", facade::element_type(*r, ref, file, line, selection)}};
}

Service::TrackResponse Service::track(const TrackRequest& request) {
    auto repo = open_request(request);
    auto graph = tracker::track(*repo, request.file_path, request.block_type, request.line, request.commit,
                                options_.track);
    auto s = std::make_unique<Session>();
    s->id = random_id();
    s->request = request;
    s->graph = std::move(graph);
    TrackResponse out{s->id, graph_payload(s->graph)};
    checkpoint(*s);
    std::lock_guard lock(mutex_);
    sessions_[s->id] = std::move(s);
    return out;
}

Service::Session& Service::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError(404, "unknown session " + id);
    return *it->second;
}

json Service::describe(const Session& s) const {
    json decisions = json::array();
    for (const auto& d : s.decisions) decisions.push_back(decision_json(d));
    const std::string repo = s.request.repo_path ? *s.request.repo_path : *s.request.clone_url;
    return {{"id", s.id},
            {"request", to_json(s.request)},
            {"state", s.state()},
            {"graph", tracker::to_json(s.graph)},
            {"decisions", decisions},
            {"oracle", evalkit::to_json(evalkit::oracle_from_graph(s.graph, repo, s.request.file_path,
                                                                   s.request.block_type))}};
}

void Service::checkpoint(const Session& s) {
    if (options_.sessions_dir.empty()) return;
    std::filesystem::create_directories(options_.sessions_dir);
    const auto path = options_.sessions_dir / (s.id + ".json");
    const auto tmp = options_.sessions_dir / (s.id + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << describe(s).dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

json Service::session(const std::string& id) {
    auto& s = find(id);
    std::lock_guard lock(s.mutex);
    return describe(s);
}

json Service::decide(const std::string& id, const Decision& d) {
    auto& s = find(id);
    std::lock_guard lock(s.mutex);
    auto& g = s.graph;
    std::optional<std::size_t> x;
    for (std::size_t i = 0; i < g.nodes.size() && !x; ++i) {
        if (g.nodes[i].commit.id == d.commit_id) x = i;
    }
    if (!x) throw HttpError(409, "commit " + d.commit_id + " is not in the session graph");

    if (d.verdict == "confirm") {
        s.decisions.push_back(d);
        checkpoint(s);
        return {{"status", "recorded"}};
    }
    if (!d.correction) {
        s.decisions.push_back(d);
        s.unresolved = true;
        checkpoint(s);
        return {{"status", "unresolved"}};
    }

    // Re-track the corrected element from the parent of the faulted commit.
    auto repo = open_request(s.request);
    const auto& faulted = g.nodes[*x].commit;
    const auto full = repo->resolve(faulted.id);
    if (full.is_root()) throw HttpError(409, "commit " + faulted.id + " has no parent to resume from");
    const std::string parent = *full.first_parent();
    auto suffix = tracker::track(*repo, d.correction->file, d.correction->block_type, d.correction->line, parent,
                                 options_.track);

    // Nodes still reachable from the start without passing below the faulted node.
    std::vector<bool> keep(g.nodes.size(), false);
    std::vector<std::size_t> stack = {g.start};
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        if (keep[n]) continue;
        keep[n] = true;
        if (n == *x) continue;
        for (const auto* e : g.incoming(n)) {
            if (e->from) stack.push_back(*e->from);
        }
    }
    tracker::ChangeHistoryGraph out;
    std::vector<std::size_t> remap(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (!keep[i]) continue;
        remap[i] = out.nodes.size();
        out.nodes.push_back(g.nodes[i]);
    }
    for (const auto& e : g.edges) {
        if (e.to == *x || !keep[e.to] || (e.from && !keep[*e.from])) continue;
        out.edges.push_back({e.from ? std::optional(remap[*e.from]) : std::nullopt, remap[e.to], e.changes});
    }
    const std::size_t base = out.nodes.size();
    for (auto& n : suffix.nodes) out.nodes.push_back(std::move(n));
    for (const auto& e : suffix.edges) {
        out.edges.push_back({e.from ? std::optional(*e.from + base) : std::nullopt, e.to + base, e.changes});
    }
    if (!suffix.nodes.empty()) {
        // Changes between the corrected element and the faulted version.
        srcmodel::SourceModel lm, rm;
        const auto* left = locate(*repo, out.nodes[base + suffix.start], lm);
        const auto* right = locate(*repo, g.nodes[*x], rm);
        stmtmap::MappingSet mapping;
        const auto lo = srcmodel::owner_of(lm, *left);
        const auto ro = srcmodel::owner_of(rm, *right);
        if (lo && ro) mapping = stmtmap::map_bodies(*lo->method, *ro->method, options_.track.config.mapper);
        out.edges.push_back({base + suffix.start, remap[*x], tracker::classify_changes(*left, *right, mapping)});
    }
    std::stable_sort(out.edges.begin(), out.edges.end(),
                     [](const tracker::HistoryEdge& a, const tracker::HistoryEdge& b) { return a.to < b.to; });
    out.start = remap[g.start];
    out.diagnostics = g.diagnostics;
    out.diagnostics.insert(out.diagnostics.end(), suffix.diagnostics.begin(), suffix.diagnostics.end());
    out.hooks = g.hooks;
    g = std::move(out);
    s.decisions.push_back(d);
    s.unresolved = false;
    checkpoint(s);
    return {{"status", "resumed"}, {"resumedFrom", parent}};
}

}  // namespace blocktrace::facade
