#pragma once

#include "blocktrace/error.hpp"
#include "blocktrace/gitio.hpp"
#include "blocktrace/tracker.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace blocktrace::evalkit {

class OracleFormatError : public Error {
public:
    using Error::Error;
};

/// History and oracle describe different starting blocks.
class MismatchedElement : public Error {
public:
    using Error::Error;
};

/// One commit of a block's ground-truth history.
struct ExpectedChange {
    std::string commit_id;
    std::vector<std::string> changes;  // change tags
    std::string before;                // key of the version before the change; empty when introduced
    std::string after;
    /// Belongs to a secondary branch of a fork; dropped in baseline-fair scoring.
    bool fork{false};
    /// Terminal entry for a block already present in the repository's first commit.
    bool existed_since_first_commit{false};
};

struct OracleEntry {
    std::string repository;
    std::string file;
    std::string block_kind;
    std::string block_key;
    std::vector<ExpectedChange> expected;  // newest first
};

inline constexpr int kOracleSchemaVersion = 1;

nlohmann::json to_json(const OracleEntry& oracle);
/// Throws OracleFormatError on a wrong schemaVersion, missing fields or a
/// terminal entry that is neither introduced nor flagged as pre-existing.
OracleEntry oracle_from_json(const nlohmann::json& j);

/// Oracle that states exactly what `graph` reports; fork branches are the
/// nodes off the primary line (see primary_line).
OracleEntry oracle_from_graph(const tracker::ChangeHistoryGraph& graph, const std::string& repository,
                              const std::string& file, const std::string& block_kind);

/// Nodes reached from the start node by always taking the first incoming edge.
std::vector<std::size_t> primary_line(const tracker::ChangeHistoryGraph& graph);

enum class Level { commit, change };

std::string to_string(Level level);
std::optional<Level> parse_level(std::string_view text);

struct ScoreReport {
    Level level{Level::commit};
    std::size_t tp{0}, fp{0}, fn{0};
    double precision{1.0};
    double recall{1.0};
};

/// Precision and recall from raw counts; an empty denominator gives 1.
ScoreReport score_counts(std::size_t tp, std::size_t fp, std::size_t fn, Level level = Level::commit);

/// Counts summed over several reports of one level.
ScoreReport aggregate(const std::vector<ScoreReport>& reports, Level level);

struct ScoreOptions {
    /// Score only the primary line of forks.
    bool baseline_fair{false};
};

/// Commit level compares the sets of commits carrying at least one change;
/// change level compares (commit, tag) pairs. Throws MismatchedElement when
/// the oracle's block key differs from the history's start node.
ScoreReport score(const tracker::ChangeHistoryGraph& history, const OracleEntry& oracle, Level level,
                  const ScoreOptions& options = {});

/// Commit-level score of a plain commit list (a baseline's output).
ScoreReport score_commits(const std::vector<std::string>& reported, const OracleEntry& oracle,
                          const ScoreOptions& options = {});

nlohmann::json to_json(const ScoreReport& report);

/// A reported commit rewrote more than the reformatting threshold of the
/// file; the trace must be restarted with a range valid at that commit.
class RangeRestartNeeded : public Error {
public:
    explicit RangeRestartNeeded(std::string commit_id)
        : Error("line range needs a restart at reformatting commit " + commit_id), commit_id_(std::move(commit_id)) {}
    const std::string& commit_id() const noexcept { return commit_id_; }

private:
    std::string commit_id_;
};

struct LineRange {
    int start{0};
    int end{0};
};

struct BaselineOptions {
    /// Drop reported commits older than this one (the oracle's introduction commit).
    std::optional<std::string> introduction;
    /// Ranges valid at reformatting commits, keyed by commit id.
    std::map<std::string, LineRange> corrections;
    /// Fraction of the file's lines that must differ only in whitespace.
    double reformat_threshold{0.95};
};

/// Fraction of `path`'s lines at `commit` that a whitespace-insensitive
/// diff against the first parent no longer reports as changed.
double reformatted_fraction(const gitio::Repository& repo, const std::string& commit, const std::string& path);

/// Commits `git log -L start,end:file` reports from `start_commit`, newest
/// first, trimmed and restarted as configured.
std::vector<std::string> gitlog_baseline(const gitio::Repository& repo, const std::string& file, LineRange range,
                                         const std::string& start_commit = "HEAD", const BaselineOptions& options = {});

struct CommitTiming {
    std::string commit_id;
    std::string step;
    tracker::StepCategory category{tracker::StepCategory::no_change};
    double ms{0};

    bool operator==(const CommitTiming&) const = default;
};

struct CategoryTotals {
    std::size_t commits{0};
    double ms{0};
    double time_fraction{0};

    bool operator==(const CategoryTotals&) const = default;
};

struct SessionTiming {
    double total_ms{0};
    std::vector<CommitTiming> commits;
    std::map<tracker::StepCategory, CategoryTotals> categories;

    bool operator==(const SessionTiming&) const = default;
};

/// Per-category totals of already recorded steps; every category is present.
SessionTiming summarize(const std::vector<tracker::StepRecord>& steps, double total_ms);

/// Runs one tracking session on a monotonic clock and summarizes its steps.
SessionTiming time_session(const gitio::Repository& repo, const std::string& file_path, const std::string& block_type,
                           int start_line, const std::string& start_commit = "HEAD",
                           const tracker::TrackOptions& options = {});

nlohmann::json to_json(const SessionTiming& timing);
SessionTiming timing_from_json(const nlohmann::json& j);

}  // namespace blocktrace::evalkit
