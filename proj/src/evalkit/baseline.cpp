#include "blocktrace/evalkit.hpp"

#include <algorithm>
#include <sstream>

namespace blocktrace::evalkit {

namespace {

/// Lines added according to `git diff --numstat` with extra flags.
long added_lines(const gitio::Repository& repo, const std::string& parent, const std::string& commit,
                 const std::string& path, std::vector<std::string> flags) {
    std::vector<std::string> args = {"diff", "--numstat"};
    args.insert(args.end(), flags.begin(), flags.end());
    args.insert(args.end(), {parent, commit, "--", path});
    std::istringstream in(repo.git(args));
    std::string added;
    long total = 0;
    while (in >> added) {
        std::string deleted, name;
        in >> deleted;
        std::getline(in, name);
        if (added != "-") total += std::stol(added);
    }
    return total;
}

std::vector<std::string> log_range(const gitio::Repository& repo, const std::string& file, LineRange range,
                                   const std::string& from) {
    const std::string spec = std::to_string(range.start) + "," + std::to_string(range.end) + ":" + file;
    std::istringstream in(repo.git({"log", "--first-parent", "-L", spec, "--format=%H", "-s", from}));
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        if (gitio::is_full_sha(line)) out.push_back(line);
    }
    return out;
}

void trace(const gitio::Repository& repo, const std::string& file, LineRange range, const std::string& from,
           const BaselineOptions& options, bool restarted, std::vector<std::string>& out) {
    for (const auto& c : log_range(repo, file, range, from)) {
        const bool fresh = !(restarted && c == from);
        if (fresh && reformatted_fraction(repo, c, file) > options.reformat_threshold) {
            auto fix = options.corrections.find(c);
            if (fix == options.corrections.end()) throw RangeRestartNeeded(c);
            trace(repo, file, fix->second, c, options, true, out);
            return;
        }
        out.push_back(c);
    }
}

}  // namespace

double reformatted_fraction(const gitio::Repository& repo, const std::string& commit, const std::string& path) {
    const auto ref = repo.resolve(commit);
    if (ref.is_root()) return 0.0;
    const auto text = repo.read_file(ref, path);
    if (!text || text->empty()) return 0.0;
    const long lines = static_cast<long>(std::count(text->begin(), text->end(), '\n')) + (text->back() != '\n');
    const auto& parent = *ref.first_parent();
    const long plain = added_lines(repo, parent, ref.id, path, {});
    const long ignoring = added_lines(repo, parent, ref.id, path, {"--ignore-all-space", "--ignore-blank-lines"});
    return static_cast<double>(plain - ignoring) / static_cast<double>(lines);
}

std::vector<std::string> gitlog_baseline(const gitio::Repository& repo, const std::string& file, LineRange range,
                                         const std::string& start_commit, const BaselineOptions& options) {
    std::vector<std::string> out;
    trace(repo, file, range, repo.resolve(start_commit).id, options, false, out);
    if (options.introduction) {
        const auto intro = repo.resolve(*options.introduction).id;
        std::erase_if(out, [&](const std::string& c) { return c != intro && repo.is_ancestor(c, intro); });
    }
    return out;
}

}  // namespace blocktrace::evalkit
