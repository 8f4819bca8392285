#include "blocktrace/evalkit.hpp"

#include <algorithm>

namespace blocktrace::evalkit {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw OracleFormatError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw OracleFormatError(std::string("field '") + name + "': " + e.what());
    }
}

}  // namespace

json to_json(const OracleEntry& oracle) {
    json expected = json::array();
    for (const auto& e : oracle.expected) {
        json item = {{"commitId", e.commit_id}, {"changes", e.changes}, {"before", e.before}, {"after", e.after}};
        if (e.fork) item["fork"] = true;
        if (e.existed_since_first_commit) item["existedSinceFirstCommit"] = true;
        expected.push_back(std::move(item));
    }
    return {{"schemaVersion", kOracleSchemaVersion}, {"repository", oracle.repository}, {"file", oracle.file},
            {"block_kind", oracle.block_kind},       {"block_key", oracle.block_key},   {"expected", expected}};
}

OracleEntry oracle_from_json(const json& j) {
    const int version = field<int>(j, "schemaVersion");
    if (version != kOracleSchemaVersion) {
        throw OracleFormatError("unsupported schemaVersion " + std::to_string(version));
    }
    OracleEntry o;
    o.repository = field<std::string>(j, "repository");
    o.file = field<std::string>(j, "file");
    o.block_kind = field<std::string>(j, "block_kind");
    o.block_key = field<std::string>(j, "block_key");
    for (const auto& item : field<json>(j, "expected")) {
        ExpectedChange e;
        e.commit_id = field<std::string>(item, "commitId");
        e.changes = field<std::vector<std::string>>(item, "changes");
        for (const auto& tag : e.changes) {
            if (!tracker::parse_change_type(tag)) throw OracleFormatError("unknown change type '" + tag + "'");
        }
        e.before = item.value("before", std::string());
        e.after = item.value("after", std::string());
        e.fork = item.value("fork", false);
        e.existed_since_first_commit = item.value("existedSinceFirstCommit", false);
        o.expected.push_back(std::move(e));
    }
    // The last entry of the primary line must end the history.
    for (auto it = o.expected.rbegin(); it != o.expected.rend(); ++it) {
        if (it->fork) continue;
        const bool introduced = std::find(it->changes.begin(), it->changes.end(), "introduced") != it->changes.end();
        if (!introduced && !it->existed_since_first_commit) {
            throw OracleFormatError("terminal entry " + it->commit_id + " is neither introduced nor pre-existing");
        }
        break;
    }
    return o;
}

std::vector<std::size_t> primary_line(const tracker::ChangeHistoryGraph& graph) {
    std::vector<std::size_t> out;
    if (graph.nodes.empty()) return out;
    std::size_t n = graph.start;
    while (true) {
        out.push_back(n);
        const tracker::HistoryEdge* first = nullptr;
        for (const auto& e : graph.edges) {
            if (e.to == n && e.from) {
                first = &e;
                break;
            }
        }
        if (!first || std::find(out.begin(), out.end(), *first->from) != out.end()) return out;
        n = *first->from;
    }
}

OracleEntry oracle_from_graph(const tracker::ChangeHistoryGraph& graph, const std::string& repository,
                              const std::string& file, const std::string& block_kind) {
    OracleEntry o{repository, file, block_kind, {}, {}};
    if (graph.nodes.empty()) return o;
    o.block_key = graph.nodes[graph.start].signature;
    const auto line = primary_line(graph);
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        ExpectedChange e;
        e.commit_id = graph.nodes[i].commit.id;
        e.after = graph.nodes[i].signature;
        e.fork = std::find(line.begin(), line.end(), i) == line.end();
        const auto in = graph.incoming(i);
        for (const auto* edge : in) {
            for (const auto& c : edge->changes) e.changes.push_back(tracker::to_string(c.type));
            if (edge->from && e.before.empty()) e.before = graph.nodes[*edge->from].signature;
        }
        e.existed_since_first_commit = in.empty();
        o.expected.push_back(std::move(e));
    }
    return o;
}

}  // namespace blocktrace::evalkit
