#include "blocktrace/evalkit.hpp"

#include <algorithm>
#include <set>

namespace blocktrace::evalkit {

using Pairs = std::set<std::pair<std::string, std::string>>;

namespace {

Pairs graph_pairs(const tracker::ChangeHistoryGraph& g, bool fair) {
    std::vector<std::size_t> nodes;
    if (fair) {
        nodes = primary_line(g);
    } else {
        for (std::size_t i = 0; i < g.nodes.size(); ++i) nodes.push_back(i);
    }
    Pairs out;
    for (auto i : nodes) {
        for (const auto* e : g.incoming(i)) {
            for (const auto& c : e->changes) out.insert({g.nodes[i].commit.id, tracker::to_string(c.type)});
        }
    }
    return out;
}

Pairs oracle_pairs(const OracleEntry& o, bool fair) {
    Pairs out;
    for (const auto& e : o.expected) {
        if (fair && e.fork) continue;
        for (const auto& t : e.changes) out.insert({e.commit_id, t});
    }
    return out;
}

std::set<std::string> commits_of(const Pairs& p) {
    std::set<std::string> out;
    for (const auto& [c, t] : p) out.insert(c);
    return out;
}

template <typename T>
ScoreReport compare(const std::set<T>& got, const std::set<T>& want, Level level) {
    std::size_t tp = 0;
    for (const auto& x : got) tp += want.count(x);
    return score_counts(tp, got.size() - tp, want.size() - tp, level);
}

}  // namespace

std::string to_string(Level level) { return level == Level::commit ? "commit" : "change"; }

std::optional<Level> parse_level(std::string_view text) {
    if (text == "commit") return Level::commit;
    if (text == "change") return Level::change;
    return std::nullopt;
}

ScoreReport score_counts(std::size_t tp, std::size_t fp, std::size_t fn, Level level) {
    ScoreReport r{level, tp, fp, fn, 1.0, 1.0};
    if (tp + fp) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return r;
}

ScoreReport aggregate(const std::vector<ScoreReport>& reports, Level level) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& r : reports) {
        tp += r.tp;
        fp += r.fp;
        fn += r.fn;
    }
    return score_counts(tp, fp, fn, level);
}

ScoreReport score(const tracker::ChangeHistoryGraph& history, const OracleEntry& oracle, Level level,
                  const ScoreOptions& options) {
    if (!history.nodes.empty() && !oracle.block_key.empty() &&
        history.nodes.at(history.start).signature != oracle.block_key) {
        throw MismatchedElement("history starts at " + history.nodes.at(history.start).signature +
                                " but the oracle describes " + oracle.block_key);
    }
    const auto got = graph_pairs(history, options.baseline_fair);
    const auto want = oracle_pairs(oracle, options.baseline_fair);
    if (level == Level::change) return compare(got, want, level);
    return compare(commits_of(got), commits_of(want), level);
}

ScoreReport score_commits(const std::vector<std::string>& reported, const OracleEntry& oracle,
                          const ScoreOptions& options) {
    const std::set<std::string> got(reported.begin(), reported.end());
    return compare(got, commits_of(oracle_pairs(oracle, options.baseline_fair)), Level::commit);
}

nlohmann::json to_json(const ScoreReport& r) {
    return {{"level", to_string(r.level)}, {"tp", r.tp},           {"fp", r.fp},
            {"fn", r.fn},                  {"precision", r.precision}, {"recall", r.recall}};
}

}  // namespace blocktrace::evalkit
