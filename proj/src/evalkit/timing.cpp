#include "blocktrace/evalkit.hpp"

#include <chrono>

namespace blocktrace::evalkit {

using nlohmann::json;

namespace {

const tracker::StepCategory kCategories[] = {tracker::StepCategory::no_change, tracker::StepCategory::change,
                                             tracker::StepCategory::move};

tracker::StepCategory parse_category(const std::string& s) {
    for (auto c : kCategories) {
        if (tracker::to_string(c) == s) return c;
    }
    throw tracker::WireFormatError("unknown step category '" + s + "'");
}

}  // namespace

SessionTiming summarize(const std::vector<tracker::StepRecord>& steps, double total_ms) {
    SessionTiming t;
    t.total_ms = total_ms;
    for (auto c : kCategories) t.categories[c] = {};
    double step_ms = 0;
    for (const auto& s : steps) {
        t.commits.push_back({s.commit_id, s.step, s.category, s.ms});
        auto& cat = t.categories[s.category];
        ++cat.commits;
        cat.ms += s.ms;
        step_ms += s.ms;
    }
    for (auto& [c, cat] : t.categories) cat.time_fraction = step_ms > 0 ? cat.ms / step_ms : 0.0;
    return t;
}

SessionTiming time_session(const gitio::Repository& repo, const std::string& file_path, const std::string& block_type,
                           int start_line, const std::string& start_commit, const tracker::TrackOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = tracker::track_session(repo, file_path, block_type, start_line, start_commit, options);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return summarize(result.steps, ms);
}

json to_json(const SessionTiming& t) {
    json commits = json::array();
    for (const auto& c : t.commits) {
        commits.push_back({{"commitId", c.commit_id}, {"step", c.step}, {"category", tracker::to_string(c.category)},
                           {"ms", c.ms}});
    }
    json categories = json::object();
    for (const auto& [c, cat] : t.categories) {
        categories[tracker::to_string(c)] = {{"commits", cat.commits}, {"ms", cat.ms}, {"timeFraction", cat.time_fraction}};
    }
    return {{"totalMs", t.total_ms}, {"commits", commits}, {"categories", categories}};
}

SessionTiming timing_from_json(const json& j) {
    try {
        SessionTiming t;
        t.total_ms = j.at("totalMs").get<double>();
        for (const auto& c : j.at("commits")) {
            t.commits.push_back({c.at("commitId").get<std::string>(), c.at("step").get<std::string>(),
                                 parse_category(c.at("category").get<std::string>()), c.at("ms").get<double>()});
        }
        for (const auto& [name, cat] : j.at("categories").items()) {
            t.categories[parse_category(name)] = {cat.at("commits").get<std::size_t>(), cat.at("ms").get<double>(),
                                                  cat.at("timeFraction").get<double>()};
        }
        return t;
    } catch (const json::exception& e) {
        throw tracker::WireFormatError(std::string("timing report: ") + e.what());
    }
}

}  // namespace blocktrace::evalkit
