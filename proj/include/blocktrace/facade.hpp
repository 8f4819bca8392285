#pragma once

#include "blocktrace/error.hpp"
#include "blocktrace/evalkit.hpp"
#include "blocktrace/gitio.hpp"
#include "blocktrace/tracker.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace blocktrace::facade {

/// Error with the HTTP status it maps to.
class HttpError : public Error {
public:
    HttpError(int status, const std::string& message) : Error(message), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Block kinds accepted by track requests: the ten trackable statement
/// kinds plus "pipeline".
const std::vector<std::string>& supported_block_types();

struct TrackRequest {
    std::optional<std::string> repo_path;
    std::optional<std::string> clone_url;
    std::string commit{"HEAD"};
    std::string file_path;
    std::string block_type;
    int line{0};
};

/// Throws HttpError(422) on missing or ill-typed fields or an unsupported block type.
TrackRequest parse_track_request(const nlohmann::json& j);
nlohmann::json to_json(const TrackRequest& r);

/// The one serializer for graphs leaving the process (CLI stdout and REST body).
std::string graph_payload(const tracker::ChangeHistoryGraph& graph);

/// Block kind selected at `line` of `path`, or "invalid". `selection` is
/// the selected text; an empty selection picks the outermost block on the line.
std::string element_type(const gitio::Repository& repo, const gitio::CommitRef& commit, const std::string& path,
                         int line, const std::string& selection);

/// Maps library errors to an HTTP status: 404 for unknown repositories,
/// commits, paths and blocks, 422 for unparseable input, 500 otherwise.
int status_for(const std::exception& e);

struct Correction {
    std::string file;
    std::string block_type;
    int line{0};
};

struct Decision {
    std::string commit_id;
    std::string verdict;  // "confirm" or "reject"
    std::optional<Correction> correction;
};

/// Throws HttpError(422) on a malformed decision.
Decision parse_decision(const nlohmann::json& j);

struct ServiceOptions {
    /// Clones of remote repositories land here.
    std::filesystem::path workspace{"blocktrace-workspace"};
    /// Session checkpoints; none are written when empty.
    std::filesystem::path sessions_dir;
    tracker::TrackOptions track;
};

/// State behind the REST endpoints. Safe for concurrent use; decisions on
/// one session are serialized.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();

    /// {"elementType": kind-or-"invalid"}
    nlohmann::json element_type(const std::string& repo, const std::string& commit, const std::string& file, int line,
                                const std::string& selection);

    struct TrackResponse {
        std::string session_id;
        std::string payload;  // graph_payload of the tracked graph
    };
    TrackResponse track(const TrackRequest& request);

    /// {"status": "recorded" | "resumed" | "unresolved", "resumedFrom"?: commit}
    nlohmann::json decide(const std::string& session_id, const Decision& decision);

    /// {"id", "request", "state", "graph", "decisions", "oracle"}
    nlohmann::json session(const std::string& session_id);

private:
    struct Session;
    Session& find(const std::string& id);
    std::shared_ptr<gitio::Repository> open(const std::string& path_or_url, bool is_url);
    std::shared_ptr<gitio::Repository> open_request(const TrackRequest& r);
    void checkpoint(const Session& s);
    nlohmann::json describe(const Session& s) const;

    ServiceOptions options_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<gitio::Repository>> repos_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::size_t next_id_{1};
};

}  // namespace blocktrace::facade
