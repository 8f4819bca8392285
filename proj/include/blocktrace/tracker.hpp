#pragma once

#include "blocktrace/error.hpp"
#include "blocktrace/gitio.hpp"
#include "blocktrace/refdetect.hpp"
#include "blocktrace/srcmodel.hpp"

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace blocktrace::tracker {

using srcmodel::BlockIdentifier;

enum class ChangeType {
    introduced,
    body_change,
    expression_change,
    catch_block_change,
    catch_block_added,
    catch_block_removed,
    finally_block_change,
    finally_block_added,
    finally_block_removed,
    block_split,
    block_merge,
    replace_loop_with_pipeline,
    replace_pipeline_with_loop,
    block_type_migration,
};

/// Wire tag, e.g. "body-change".
std::string to_string(ChangeType type);
std::optional<ChangeType> parse_change_type(std::string_view tag);
const std::vector<ChangeType>& all_change_types();

struct Change {
    ChangeType type{ChangeType::body_change};
    std::string description;

    bool operator==(const Change&) const = default;
};

struct HistoryNode {
    BlockIdentifier element;
    gitio::CommitRef commit;
    /// element.key(), kept as text so graphs read back from JSON compare equal.
    std::string signature;
};

/// Directed older -> newer. `from` is empty on the edge that marks the
/// node where the block was introduced.
struct HistoryEdge {
    std::optional<std::size_t> from;
    std::size_t to{0};
    std::vector<Change> changes;
};

/// An extract/split/move event crossed while tracking; only collected when
/// TrackOptions::emit_evolution_hooks is set.
struct EvolutionHook {
    std::string commit_id;
    std::string kind;
    std::string file;
};

struct ChangeHistoryGraph {
    /// Newest first along the first-parent chain of the start commit.
    std::vector<HistoryNode> nodes;
    std::vector<HistoryEdge> edges;
    std::size_t start{0};
    std::vector<std::string> diagnostics;
    std::vector<EvolutionHook> hooks;

    /// Edges whose `to` is node `i`.
    std::vector<const HistoryEdge*> incoming(std::size_t i) const;
};

enum class StepCategory { no_change, change, move };

std::string to_string(StepCategory c);

/// One processed commit: which step resolved it and how long it took.
struct StepRecord {
    std::string commit_id;
    std::string step;  // "step2", "step3", "step4", "step5a", "step5b", "step5", "root"
    StepCategory category{StepCategory::no_change};
    double ms{0};
};

struct TrackOptions {
    refdetect::Config config;
    bool emit_evolution_hooks{false};
};

struct TrackResult {
    ChangeHistoryGraph graph;
    std::vector<StepRecord> steps;
};

/// Tracks the block of `block_type` starting at `start_line` of `file_path`
/// at `start_commit` back through history. Throws CodeElementNotFound when no
/// such block exists there.
TrackResult track_session(const gitio::Repository& repo, const std::string& file_path, const std::string& block_type,
                          int start_line, const std::string& start_commit = "HEAD", const TrackOptions& options = {});

ChangeHistoryGraph track(const gitio::Repository& repo, const std::string& file_path, const std::string& block_type,
                         int start_line, const std::string& start_commit = "HEAD", const TrackOptions& options = {});

/// Tracking seeded with a block identity instead of a line. Used to resume
/// from a corrected element.
TrackResult track_from(const gitio::Repository& repo, const gitio::CommitRef& commit, const std::string& file_path,
                       const std::string& block_key, const TrackOptions& options = {});

/// Change tags between two matched blocks.
std::vector<Change> classify_changes(const srcmodel::StatementNode& left, const srcmodel::StatementNode& right,
                                     const stmtmap::MappingSet& mapping);

class WireFormatError : public Error {
public:
    using Error::Error;
};

nlohmann::json to_json(const ChangeHistoryGraph& graph);
/// Inverse of to_json for the wire fields; block identity beyond the
/// signature string is not reconstructed.
ChangeHistoryGraph graph_from_json(const nlohmann::json& j);

}  // namespace blocktrace::tracker
