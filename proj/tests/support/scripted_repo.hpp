#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace blocktrace::testing {

/// Self-deleting temporary directory.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "blocktrace");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Builds a git repository commit by commit through `git fast-import`.
/// Edits are staged with write/remove/rename and sealed by commit(); the
/// builder keeps the full tree of every commit so tests can derive ground
/// truth (which commits touched which path) independently of gitio.
class ScriptedRepo {
public:
    ScriptedRepo();
    ~ScriptedRepo();
    ScriptedRepo(const ScriptedRepo&) = delete;
    ScriptedRepo& operator=(const ScriptedRepo&) = delete;

    ScriptedRepo& write(const std::string& path, const std::string& content);
    ScriptedRepo& remove(const std::string& path);
    ScriptedRepo& rename(const std::string& from, const std::string& to);

    /// Seals staged edits into a commit on the current branch; returns its index.
    std::size_t commit(const std::string& message, const std::string& author = "Alice");

    /// Starts (or switches to) `branch`, forking from the commit index `from`.
    void branch(const std::string& name, std::size_t from);
    void checkout(const std::string& name);
    /// Merge commit on the current branch whose second parent is `other`'s tip.
    std::size_t merge(const std::string& other, const std::string& message);

    /// Commit sha for an index; flushes pending commits into git first.
    std::string id(std::size_t index);
    std::vector<std::string> ids();
    std::size_t size() const noexcept { return commits_.size(); }

    /// Repository directory; flushes pending commits so git sees them.
    const std::filesystem::path& root() {
        flush();
        return dir_.path();
    }

    /// Tree snapshot after commit `index`.
    const std::map<std::string, std::string>& tree(std::size_t index) const;
    std::optional<std::string> content(std::size_t index, const std::string& path) const;
    /// Paths whose content differs from the first parent's tree (added, changed, removed).
    std::set<std::string> touched(std::size_t index) const;
    std::optional<std::size_t> first_parent(std::size_t index) const;

    /// 1-based line of the first line containing `needle` in `path` at `index`.
    int line_of(std::size_t index, const std::string& path, const std::string& needle) const;

private:
    struct Pending {
        std::string message;
        std::string author;
        std::string branch;
        std::optional<std::size_t> parent;
        std::optional<std::size_t> merge_parent;
        std::vector<std::string> ops;
    };
    struct Commit {
        std::map<std::string, std::string> tree;
        std::optional<std::size_t> parent;
        std::optional<std::size_t> merge_parent;
        std::string sha;
    };

    void flush();

    TempDir dir_;
    std::vector<Commit> commits_;
    std::vector<Pending> pending_;
    std::size_t flushed_{0};
    std::map<std::string, std::string> staged_tree_;
    std::vector<std::string> staged_ops_;
    std::map<std::string, std::optional<std::size_t>> branches_;
    std::string current_branch_{"main"};
};

}  // namespace blocktrace::testing
