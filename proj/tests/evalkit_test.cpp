#include "doctest.h"
#include "gauntlet.hpp"

#include "blocktrace/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace blocktrace;
using namespace blocktrace::evalkit;
using namespace blocktrace::testing;

namespace {

tracker::ChangeHistoryGraph run(Scenario& s) {
    gitio::Repository repo(s.repo->root());
    return tracker::track(repo, s.file, s.block_type, s.line);
}

Scenario& find(std::vector<Scenario>& g, const std::string& name) {
    for (auto& s : g) {
        if (s.name == name) return s;
    }
    FAIL("no scenario " << name);
    throw;
}

/// Oracle written from the scenario's hand-made ground truth.
OracleEntry scripted_oracle(Scenario& s, const std::string& key) {
    OracleEntry o{"gauntlet", s.file, s.block_type, key, {}};
    auto expected = s.expected;
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) { return a.commit > b.commit; });
    for (const auto& e : expected) o.expected.push_back({s.repo->id(e.commit), e.tags, "", "", false, false});
    return o;
}

}  // namespace

TEST_CASE("precision and recall from raw counts") {
    // Independent check: cross-multiplied fractions instead of division.
    auto check = [](std::size_t tp, std::size_t fp, std::size_t fn) {
        const auto r = score_counts(tp, fp, fn);
        CHECK(r.precision * static_cast<double>(tp + fp) == doctest::Approx(static_cast<double>(tp)));
        CHECK(r.recall * static_cast<double>(tp + fn) == doctest::Approx(static_cast<double>(tp)));
    };
    check(5651, 12, 13);
    check(6063, 31, 31);
    check(1, 0, 0);
    check(3, 7, 11);

    const auto table3 = score_counts(5651, 12, 13);
    CHECK(std::abs(table3.precision * 100 - 99.79) <= 0.01);
    CHECK(std::abs(table3.recall * 100 - 99.77) <= 0.01);
    const auto table4 = score_counts(6063, 31, 31, Level::change);
    CHECK(std::abs(table4.precision * 100 - 99.5) <= 0.01);
    CHECK(std::abs(table4.recall * 100 - 99.5) <= 0.01);
    CHECK(table4.level == Level::change);

    const auto empty = score_counts(0, 0, 0);
    CHECK(empty.precision == 1.0);
    CHECK(empty.recall == 1.0);
    CHECK(score_counts(0, 4, 0).precision == 0.0);
    CHECK(score_counts(0, 4, 0).recall == 1.0);

    const auto sum = aggregate({score_counts(1, 2, 3), score_counts(4, 5, 6)}, Level::commit);
    CHECK(sum.tp == 5);
    CHECK(sum.fp == 7);
    CHECK(sum.fn == 9);
    CHECK(to_json(table4).at("level") == "change");
}

TEST_CASE("empty history against an empty oracle scores 1") {
    const auto r = score(tracker::ChangeHistoryGraph{}, OracleEntry{}, Level::change);
    CHECK(r.tp + r.fp + r.fn == 0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
}

TEST_CASE("scoring the gauntlet against its scripted oracles") {
    auto gauntlet = build_gauntlet();
    for (auto& s : gauntlet) {
        CAPTURE(s.name);
        const auto g = run(s);
        const auto oracle = scripted_oracle(s, g.nodes.at(g.start).signature);
        for (auto level : {Level::commit, Level::change}) {
            const auto r = score(g, oracle, level);
            CHECK(r.fp == 0);
            CHECK(r.fn == 0);
            CHECK(r.tp > 0);
        }
        std::set<std::string> commits;
        for (const auto& e : s.expected) commits.insert(s.repo->id(e.commit));
        CHECK(score(g, oracle, Level::commit).tp == commits.size());
    }
}

TEST_CASE("a history scored against itself has no errors") {
    auto gauntlet = build_gauntlet();
    for (auto& s : gauntlet) {
        CAPTURE(s.name);
        const auto g = run(s);
        const auto oracle = oracle_from_graph(g, "gauntlet", s.file, s.block_type);
        for (bool fair : {false, true}) {
            for (auto level : {Level::commit, Level::change}) {
                const auto r = score(g, oracle, level, {fair});
                CHECK(r.fp == 0);
                CHECK(r.fn == 0);
            }
        }
        CHECK(oracle_from_json(to_json(oracle)).expected.size() == oracle.expected.size());
        CHECK(to_json(oracle_from_json(to_json(oracle))) == to_json(oracle));
    }
}

TEST_CASE("a spurious commit raises false positives and never lowers false negatives") {
    auto gauntlet = build_gauntlet();
    for (auto& s : gauntlet) {
        CAPTURE(s.name);
        auto g = run(s);
        const auto oracle = oracle_from_graph(g, "gauntlet", s.file, s.block_type);
        const auto before_commit = score(g, oracle, Level::commit);
        const auto before_change = score(g, oracle, Level::change);
        // A node at a commit the oracle does not list, changed from the oldest node.
        auto extra = g.nodes.back();
        extra.commit.id = std::string(40, 'f');
        g.nodes.push_back(extra);
        g.edges.push_back({g.nodes.size() - 2, g.nodes.size() - 1, {{tracker::ChangeType::body_change, "spurious"}}});
        const auto after_commit = score(g, oracle, Level::commit);
        const auto after_change = score(g, oracle, Level::change);
        CHECK(after_commit.fp >= before_commit.fp + 1);
        CHECK(after_commit.fn >= before_commit.fn);
        CHECK(after_change.fp >= before_change.fp + 1);
        CHECK(after_change.fn >= before_change.fn);
    }
}

TEST_CASE("baseline-fair scoring drops secondary fork branches") {
    auto gauntlet = build_gauntlet();
    auto& s = find(gauntlet, "merge conditional");
    const auto g = run(s);
    const auto line = primary_line(g);
    CHECK(line.size() < g.nodes.size());
    auto oracle = oracle_from_graph(g, "gauntlet", s.file, s.block_type);
    const auto forks = std::count_if(oracle.expected.begin(), oracle.expected.end(), [](const auto& e) { return e.fork; });
    CHECK(forks == static_cast<long>(g.nodes.size() - line.size()));
    // Strip the fork entries: default scoring misses them, fair scoring does not.
    std::erase_if(oracle.expected, [](const evalkit::ExpectedChange& e) { return e.fork; });
    CHECK(score(g, oracle, Level::change).fp > 0);
    CHECK(score(g, oracle, Level::change, {true}).fp == 0);
    CHECK(score(g, oracle, Level::change, {true}).fn == 0);
}

TEST_CASE("oracle schema") {
    auto gauntlet = build_gauntlet();
    auto& s = find(gauntlet, "lifecycle");
    const auto g = run(s);
    const auto j = to_json(oracle_from_graph(g, "demo", s.file, "if"));
    CHECK(j.at("schemaVersion") == 1);
    for (const char* name : {"repository", "file", "block_kind", "block_key", "expected"}) CHECK(j.contains(name));
    CHECK(j.at("expected").back().at("changes") == nlohmann::json::array({"introduced"}));

    auto bad = j;
    bad["schemaVersion"] = 2;
    CHECK_THROWS_AS(oracle_from_json(bad), OracleFormatError);
    bad = j;
    bad.erase("block_key");
    CHECK_THROWS_AS(oracle_from_json(bad), OracleFormatError);
    bad = j;
    bad["expected"].back()["changes"] = nlohmann::json::array({"body-change"});
    CHECK_THROWS_AS(oracle_from_json(bad), OracleFormatError);
    bad["expected"].back()["existedSinceFirstCommit"] = true;
    CHECK_NOTHROW(oracle_from_json(bad));
    bad["expected"].back()["changes"] = nlohmann::json::array({"warped"});
    CHECK_THROWS_AS(oracle_from_json(bad), OracleFormatError);

    auto other = oracle_from_json(j);
    other.block_key = "something|else";
    CHECK_THROWS_AS(score(g, other, Level::commit), MismatchedElement);
}

namespace {

/// Class whose `run` method holds an if block; `edit` goes inside the block.
std::string runner(const std::string& edit, bool with_block = true, const std::string& other = "log(1);") {
    std::string run = with_block ? "void run() {\n    start();\n    if (ready) {\n        go();\n" + edit +
                                       "    }\n    finish();\n}"
                                 : "void run() {\n    start();\n    finish();\n}";
    return java_class("p", "class A", {"void other() {\n    " + other + "\n}", run});
}

LineRange block_range(ScriptedRepo& repo, std::size_t commit, const std::string& path) {
    const int start = repo.line_of(commit, path, "if (ready)");
    const auto text = *repo.content(commit, path);
    std::istringstream in(text);
    int line = 0;
    for (std::string l; std::getline(in, l);) {
        if (++line > start && l.rfind("    }", 0) == 0 && l.find_first_not_of(' ') == 4) return {start, line};
    }
    FAIL("no block end");
    throw;
}

}  // namespace

TEST_CASE("git log -L baseline") {
    const std::string f = "A.java";
    SUBCASE("reports the commits that edited the range") {
        ScriptedRepo repo;
        repo.write(f, runner("", false)).commit("base");
        auto c1 = repo.write(f, runner("")).commit("add block");
        repo.write(f, runner("", true, "log(2);")).commit("edit other method");
        auto c3 = repo.write(f, runner("        stop();\n", true, "log(2);")).commit("edit block");
        gitio::Repository git(repo.root());
        const auto range = block_range(repo, c3, f);
        const auto all = gitlog_baseline(git, f, range);
        CHECK(std::find(all.begin(), all.end(), repo.id(c3)) != all.end());
        CHECK(std::find(all.begin(), all.end(), repo.id(c1)) != all.end());
        CHECK(std::find(all.begin(), all.end(), repo.id(2)) == all.end());
        BaselineOptions trim;
        trim.introduction = repo.id(c1);
        CHECK(gitlog_baseline(git, f, range, "HEAD", trim) == std::vector<std::string>{repo.id(c3), repo.id(c1)});
        // Subset property: every trimmed commit lies between the introduction and the start.
        for (const auto& c : gitlog_baseline(git, f, range, "HEAD", trim)) {
            CHECK(git.is_ancestor(repo.id(c1), c));
            CHECK(git.is_ancestor(c, repo.id(c3)));
        }
    }
    SUBCASE("block untouched after its introduction") {
        ScriptedRepo repo;
        repo.write(f, runner("", false)).commit("base");
        auto c1 = repo.write(f, runner("")).commit("add block");
        repo.write("B.java", "class B {}\n").commit("elsewhere");
        gitio::Repository git(repo.root());
        BaselineOptions trim;
        trim.introduction = repo.id(c1);
        CHECK(gitlog_baseline(git, f, block_range(repo, c1, f), "HEAD", trim) == std::vector<std::string>{repo.id(c1)});
    }
    SUBCASE("a CRLF rewrite needs a range restart") {
        ScriptedRepo repo;
        repo.write(f, runner("", false)).commit("base");
        auto c1 = repo.write(f, runner("")).commit("add block");
        auto c2 = repo.write(f, runner("        stop();\n")).commit("edit block");
        auto crlf = [](std::string s) {
            std::string out;
            for (char ch : s) out += ch == '\n' ? std::string("\r\n") : std::string(1, ch);
            return out;
        };
        auto c3 = repo.write(f, crlf(runner("        stop();\n"))).commit("line endings");
        auto c4 = repo.write(f, crlf(runner("        stop();\n        halt();\n"))).commit("edit again");
        gitio::Repository git(repo.root());
        CHECK(reformatted_fraction(git, repo.id(c3), f) > 0.95);
        CHECK(reformatted_fraction(git, repo.id(c2), f) < 0.95);
        CHECK(reformatted_fraction(git, repo.id(0), f) == 0.0);
        const auto range = block_range(repo, c4, f);
        try {
            gitlog_baseline(git, f, range);
            FAIL("expected a restart");
        } catch (const RangeRestartNeeded& e) {
            CHECK(e.commit_id() == repo.id(c3));
        }
        BaselineOptions fix;
        fix.introduction = repo.id(c1);
        fix.corrections[repo.id(c3)] = block_range(repo, c3, f);
        const auto spliced = gitlog_baseline(git, f, range, "HEAD", fix);
        CHECK(spliced == std::vector<std::string>{repo.id(c4), repo.id(c3), repo.id(c2), repo.id(c1)});
    }
}

TEST_CASE("session timing") {
    SUBCASE("no-change history has no move time") {
        ScriptedRepo repo;
        repo.write("A.java", runner("")).commit("block");
        for (int i = 0; i < 99; ++i) repo.write("A.java", runner("", true, "log(" + std::to_string(i) + ");")).commit("other");
        gitio::Repository git(repo.root());
        const auto t = time_session(git, "A.java", "if", repo.line_of(99, "A.java", "if (ready)"));
        CHECK(t.commits.size() == 100);
        CHECK(t.categories.at(tracker::StepCategory::move).commits == 0);
        CHECK(t.categories.at(tracker::StepCategory::move).time_fraction == 0.0);
        CHECK(t.categories.at(tracker::StepCategory::no_change).commits == 100);
        CHECK(t.total_ms > 0);
    }
    SUBCASE("category counts add up over the gauntlet and the report round-trips") {
        auto gauntlet = build_gauntlet();
        for (auto& s : gauntlet) {
            CAPTURE(s.name);
            gitio::Repository git(s.repo->root());
            const auto t = time_session(git, s.file, s.block_type, s.line);
            std::size_t sum = 0;
            double fractions = 0;
            for (const auto& [c, cat] : t.categories) {
                sum += cat.commits;
                fractions += cat.time_fraction;
            }
            CHECK(t.categories.size() == 3);
            CHECK(sum == t.commits.size());
            CHECK((fractions == doctest::Approx(1.0) || fractions == 0.0));
            CHECK(timing_from_json(to_json(t)) == t);
            CHECK(timing_from_json(nlohmann::json::parse(to_json(t).dump())) == t);
        }
    }
}
