#pragma once

#include "scripted_repo.hpp"

#include "blocktrace/tracker.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace blocktrace::testing {

/// Hand-written ground truth for one commit of a scenario: the change tags
/// on the edges into the tracked block's version at that commit.
struct ExpectedChange {
    std::size_t commit;
    std::vector<std::string> tags;
};

/// One scripted history with the block to track at its last commit.
struct Scenario {
    std::string name;
    /// Coverage labels: "scenario:3b", "change:body-change", "transformation:for to while".
    std::set<std::string> covers;
    std::unique_ptr<ScriptedRepo> repo;
    std::string file;
    std::string block_type;
    int line{0};
    std::vector<ExpectedChange> expected;
};

std::vector<Scenario> build_gauntlet();

/// Labels every gauntlet must cover.
std::set<std::string> required_coverage();

/// Change tags per commit id.
using TagsByCommit = std::map<std::string, std::set<std::string>>;

TagsByCommit expected_tags(Scenario& s);
/// Tags on the edges into each node, keyed by the node's commit.
TagsByCommit observed_tags(const tracker::ChangeHistoryGraph& g);

/// Java source for a class with the given members, one per entry.
std::string java_class(const std::string& package, const std::string& declaration,
                       const std::vector<std::string>& members);

}  // namespace blocktrace::testing
