#include "blocktrace/gitio.hpp"

#include "blocktrace/process.hpp"

#include <cstdlib>
#include <ctime>
#include <mutex>
#include <unordered_map>

namespace blocktrace::gitio {

namespace {

constexpr char kFieldSep = '\x1f';
constexpr char kRecordSep = '\x1e';
const std::string kLogFormat = "--format=%H%x1f%an%x1f%at%x1f%P%x1f%B%x1e";

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool valid_utf8(const std::string& s) {
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        } else {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= n) return false;
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

}  // namespace

std::string to_string(FileChangeKind kind) {
    switch (kind) {
        case FileChangeKind::added: return "added";
        case FileChangeKind::modified: return "modified";
        case FileChangeKind::deleted: return "deleted";
        case FileChangeKind::renamed: return "renamed";
    }
    return "modified";
}

bool is_full_sha(const std::string& text) {
    if (text.size() != 40) return false;
    for (char c : text) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

std::string format_utc(std::int64_t epoch_seconds) {
    std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    ::gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string git_executable() {
    if (const char* override_path = std::getenv("BLOCKTRACE_GIT"); override_path && *override_path) {
        return override_path;
    }
    return "git";
}

struct Repository::Cache {
    std::shared_mutex mutex;
    std::unordered_map<std::string, CommitRef> commits;
    std::unordered_map<std::string, std::string> revs;
    std::unordered_map<std::string, std::optional<std::string>> blobs;
};

Repository::Repository(std::filesystem::path root)
    : root_(std::move(root)), cache_(std::make_shared<Cache>()) {
    auto raw = git_raw({"rev-parse", "--git-dir"});
    if (raw.exit_code != 0) {
        throw GitError("not a git repository: " + root_.string());
    }
}

Repository Repository::clone_if_absent(const std::string& url, const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / ".git") && !std::filesystem::exists(dir / "HEAD")) {
        std::filesystem::create_directories(dir.parent_path().empty() ? "." : dir.parent_path());
        auto r = run_process({git_executable(), "clone", "--quiet", url, dir.string()});
        if (r.exit_code != 0) throw GitError("git clone failed: " + trim(r.err));
    }
    return Repository(dir);
}

Repository::Raw Repository::git_raw(const std::vector<std::string>& args) const {
    std::vector<std::string> argv{git_executable(), "-c", "core.quotepath=off"};
    argv.insert(argv.end(), args.begin(), args.end());
    ProcessOptions opts;
    opts.cwd = root_;
    auto r = run_process(argv, opts);
    return {r.exit_code, std::move(r.out), std::move(r.err)};
}

std::string Repository::git(const std::vector<std::string>& args) const {
    auto r = git_raw(args);
    if (r.exit_code != 0) {
        std::string cmd;
        for (const auto& a : args) cmd += " " + a;
        throw GitError("git" + cmd + " failed: " + trim(r.err));
    }
    return std::move(r.out);
}

std::vector<CommitRef> Repository::parse_log(const std::string& text) const {
    std::vector<CommitRef> commits;
    for (auto& record : split(text, kRecordSep)) {
        auto start = record.find_first_not_of("\n");
        if (start == std::string::npos) continue;
        auto fields = split(record.substr(start), kFieldSep);
        if (fields.size() < 5) continue;
        CommitRef c;
        c.id = fields[0];
        c.author = fields[1];
        c.authored_at = std::strtoll(fields[2].c_str(), nullptr, 10);
        for (auto& p : split(fields[3], ' ')) {
            if (!p.empty()) c.parent_ids.push_back(p);
        }
        c.message = fields[4];
        while (!c.message.empty() && c.message.back() == '\n') c.message.pop_back();
        commits.push_back(std::move(c));
    }
    {
        std::unique_lock lock(cache_->mutex);
        for (const auto& c : commits) cache_->commits.emplace(c.id, c);
    }
    return commits;
}

CommitRef Repository::resolve(const std::string& rev) const {
    {
        std::shared_lock lock(cache_->mutex);
        if (auto it = cache_->commits.find(rev); it != cache_->commits.end()) return it->second;
        if (auto it = cache_->revs.find(rev); it != cache_->revs.end()) {
            if (auto c = cache_->commits.find(it->second); c != cache_->commits.end()) return c->second;
        }
    }
    if (rev.empty() || rev.front() == '-') throw UnknownCommit(rev);
    auto raw = git_raw({"rev-parse", "--verify", "--quiet", rev + "^{commit}"});
    if (raw.exit_code != 0) throw UnknownCommit(rev);
    auto sha = trim(raw.out);
    auto commits = parse_log(git({"log", "-1", kLogFormat, sha}));
    if (commits.empty()) throw UnknownCommit(rev);
    std::unique_lock lock(cache_->mutex);
    cache_->revs[rev] = sha;
    return commits.front();
}

std::vector<CommitRef> Repository::file_history(const std::string& path, const CommitRef& start) const {
    auto commit = resolve(start.id);
    if (!read_file(commit, path)) throw UnknownPath(path, commit.id);
    return parse_log(git({"log", "--follow", "--first-parent", kLogFormat, commit.id, "--", path}));
}

std::optional<std::string> Repository::read_file(const CommitRef& commit, const std::string& path) const {
    const std::string key = commit.id + ":" + path;
    {
        std::shared_lock lock(cache_->mutex);
        if (auto it = cache_->blobs.find(key); it != cache_->blobs.end()) return it->second;
    }
    auto resolved = resolve(commit.id);
    auto raw = git_raw({"cat-file", "blob", resolved.id + ":" + path});
    std::optional<std::string> blob;
    if (raw.exit_code == 0) {
        if (!valid_utf8(raw.out)) throw DecodeError("blob is not valid UTF-8: " + key);
        blob = std::move(raw.out);
    }
    std::unique_lock lock(cache_->mutex);
    return cache_->blobs.emplace(key, std::move(blob)).first->second;
}

std::vector<FileChange> Repository::changed_files(const CommitRef& start) const {
    auto commit = resolve(start.id);
    std::string out;
    if (commit.is_root()) {
        out = git({"diff-tree", "-r", "-M", "--root", "--no-commit-id", "--name-status", "-z", commit.id});
    } else {
        out = git({"diff-tree", "-r", "-M", "--name-status", "-z", commit.parent_ids.front(), commit.id});
    }
    auto parts = split(out, '\0');
    std::vector<FileChange> changes;
    for (std::size_t i = 0; i < parts.size();) {
        const auto& status = parts[i];
        if (status.empty()) {
            ++i;
            continue;
        }
        FileChange fc;
        const char s = status.front();
        if ((s == 'R' || s == 'C') && i + 2 < parts.size()) {
            if (s == 'R') {
                fc.kind = FileChangeKind::renamed;
                fc.path_before = parts[i + 1];
            } else {
                fc.kind = FileChangeKind::added;
            }
            fc.path_after = parts[i + 2];
            i += 3;
        } else if (i + 1 < parts.size()) {
            const auto& p = parts[i + 1];
            switch (s) {
                case 'A': fc.kind = FileChangeKind::added; fc.path_after = p; break;
                case 'D': fc.kind = FileChangeKind::deleted; fc.path_before = p; break;
                default: fc.kind = FileChangeKind::modified; fc.path_before = p; fc.path_after = p; break;
            }
            i += 2;
        } else {
            break;
        }
        changes.push_back(std::move(fc));
    }
    return changes;
}

std::vector<CommitRef> Repository::first_parent_chain(const CommitRef& start) const {
    auto commit = resolve(start.id);
    return parse_log(git({"log", "--first-parent", kLogFormat, commit.id}));
}

bool Repository::is_ancestor(const std::string& ancestor, const std::string& descendant) const {
    auto raw = git_raw({"merge-base", "--is-ancestor", ancestor, descendant});
    if (raw.exit_code == 0) return true;
    if (raw.exit_code == 1) return false;
    throw GitError("merge-base failed: " + trim(raw.err));
}

}  // namespace blocktrace::gitio
