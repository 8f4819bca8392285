#include "blocktrace/tracker.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

namespace blocktrace::tracker {

using nlohmann::json;

namespace {

std::int64_t parse_utc(const std::string& text) {
    std::tm tm{};
    std::istringstream in(text);
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    if (in.fail()) throw WireFormatError("bad date '" + text + "'");
    return static_cast<std::int64_t>(timegm(&tm));
}

template <typename T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) throw WireFormatError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw WireFormatError(std::string("field '") + name + "': " + e.what());
    }
}

}  // namespace

json to_json(const ChangeHistoryGraph& graph) {
    json nodes = json::array();
    for (const auto& n : graph.nodes) {
        nodes.push_back({{"commitId", n.commit.id},
                         {"author", n.commit.author},
                         {"date", gitio::format_utc(n.commit.authored_at)},
                         {"blockType", n.element.block_type},
                         {"file", n.element.path},
                         {"startLine", n.element.start_line},
                         {"endLine", n.element.end_line},
                         {"signature", n.signature}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges) {
        json changes = json::array();
        for (const auto& c : e.changes) changes.push_back({{"type", to_string(c.type)}, {"description", c.description}});
        edges.push_back({{"from", e.from ? json(*e.from) : json(nullptr)}, {"to", e.to}, {"changes", changes}});
    }
    json out = {{"start", graph.start}, {"nodes", nodes}, {"edges", edges}};
    if (!graph.diagnostics.empty()) out["diagnostics"] = graph.diagnostics;
    if (!graph.hooks.empty()) {
        json hooks = json::array();
        for (const auto& h : graph.hooks) hooks.push_back({{"commitId", h.commit_id}, {"kind", h.kind}, {"file", h.file}});
        out["hooks"] = hooks;
    }
    return out;
}

ChangeHistoryGraph graph_from_json(const json& j) {
    if (!j.is_object()) throw WireFormatError("graph must be a JSON object");
    ChangeHistoryGraph g;
    g.start = field<std::size_t>(j, "start");
    for (const auto& n : field<json>(j, "nodes")) {
        HistoryNode node;
        node.commit.id = field<std::string>(n, "commitId");
        node.commit.author = field<std::string>(n, "author");
        node.commit.authored_at = parse_utc(field<std::string>(n, "date"));
        node.element.version = node.commit.id;
        node.element.block_type = field<std::string>(n, "blockType");
        node.element.path = field<std::string>(n, "file");
        node.element.start_line = field<int>(n, "startLine");
        node.element.end_line = field<int>(n, "endLine");
        node.signature = field<std::string>(n, "signature");
        g.nodes.push_back(std::move(node));
    }
    for (const auto& e : field<json>(j, "edges")) {
        HistoryEdge edge;
        const auto& from = e.at("from");
        if (!from.is_null()) edge.from = from.get<std::size_t>();
        edge.to = field<std::size_t>(e, "to");
        if (edge.to >= g.nodes.size() || (edge.from && *edge.from >= g.nodes.size())) {
            throw WireFormatError("edge refers to a missing node");
        }
        for (const auto& c : field<json>(e, "changes")) {
            const auto tag = field<std::string>(c, "type");
            auto type = parse_change_type(tag);
            if (!type) throw WireFormatError("unknown change type '" + tag + "'");
            edge.changes.push_back({*type, c.value("description", std::string())});
        }
        g.edges.push_back(std::move(edge));
    }
    if (!g.nodes.empty() && g.start >= g.nodes.size()) throw WireFormatError("start refers to a missing node");
    if (j.contains("diagnostics")) g.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    if (j.contains("hooks")) {
        for (const auto& h : j.at("hooks")) {
            g.hooks.push_back({field<std::string>(h, "commitId"), field<std::string>(h, "kind"),
                               field<std::string>(h, "file")});
        }
    }
    return g;
}

}  // namespace blocktrace::tracker
