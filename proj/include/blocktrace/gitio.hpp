#pragma once

#include "blocktrace/error.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace blocktrace::gitio {

class GitError : public Error {
public:
    using Error::Error;
};

class UnknownCommit : public GitError {
public:
    explicit UnknownCommit(const std::string& rev) : GitError("unknown commit: " + rev), rev_(rev) {}
    const std::string& rev() const noexcept { return rev_; }

private:
    std::string rev_;
};

class UnknownPath : public GitError {
public:
    UnknownPath(const std::string& path, const std::string& commit)
        : GitError("path '" + path + "' does not exist at " + commit), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class DecodeError : public GitError {
public:
    using GitError::GitError;
};

struct CommitRef {
    std::string id;  // 40 lowercase hex characters
    std::string author;
    std::int64_t authored_at{0};  // seconds since the epoch, UTC
    std::string message;
    std::vector<std::string> parent_ids;

    bool is_root() const noexcept { return parent_ids.empty(); }
    const std::string* first_parent() const noexcept {
        return parent_ids.empty() ? nullptr : &parent_ids.front();
    }
};

enum class FileChangeKind { added, modified, deleted, renamed };

std::string to_string(FileChangeKind kind);

struct FileChange {
    std::optional<std::string> path_before;
    std::optional<std::string> path_after;
    FileChangeKind kind{FileChangeKind::modified};
};

bool is_full_sha(const std::string& text);

/// Formats an epoch timestamp as ISO-8601 UTC ("2024-01-31T12:00:00Z").
std::string format_utc(std::int64_t epoch_seconds);

/// Read-only view of a local git clone. Every query shells out to the git
/// executable ($BLOCKTRACE_GIT, else "git"); blob reads and commit metadata
/// are cached and the cache is safe for concurrent use.
class Repository {
public:
    explicit Repository(std::filesystem::path root);

    /// Opens `dir`, cloning `url` into it first when `dir` is not a repository yet.
    static Repository clone_if_absent(const std::string& url, const std::filesystem::path& dir);

    const std::filesystem::path& root() const noexcept { return root_; }

    /// Resolves any revision expression ("HEAD", short sha, ...) to a commit.
    CommitRef resolve(const std::string& rev) const;

    /// Commits reachable from `start` along first parents in which `path`
    /// changed, following renames. Newest first.
    std::vector<CommitRef> file_history(const std::string& path, const CommitRef& start) const;

    /// Exact blob contents, or nullopt when the path is absent at `commit`.
    std::optional<std::string> read_file(const CommitRef& commit, const std::string& path) const;

    /// Added/modified/deleted/renamed files relative to the first parent.
    std::vector<FileChange> changed_files(const CommitRef& commit) const;

    /// Full first-parent ancestry from `start`, newest first.
    std::vector<CommitRef> first_parent_chain(const CommitRef& start) const;

    /// True when `ancestor` is reachable from `descendant` (or equal).
    bool is_ancestor(const std::string& ancestor, const std::string& descendant) const;

    /// Runs git with `args` inside the repository; throws GitError on a
    /// non-zero exit status.
    std::string git(const std::vector<std::string>& args) const;

    /// Like git() but returns the exit code alongside captured output.
    struct Raw {
        int exit_code;
        std::string out;
        std::string err;
    };
    Raw git_raw(const std::vector<std::string>& args) const;

private:
    struct Cache;
    std::filesystem::path root_;
    std::shared_ptr<Cache> cache_;

    std::vector<CommitRef> parse_log(const std::string& text) const;
};

/// Path of the git executable honoring $BLOCKTRACE_GIT.
std::string git_executable();

}  // namespace blocktrace::gitio
