#include "blocktrace/evalkit.hpp"
#include "blocktrace/facade.hpp"
#include "blocktrace/http.hpp"
#include "blocktrace/refdetect.hpp"
#include "blocktrace/srcmodel.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace blocktrace;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

tracker::TrackOptions track_options(const std::string& config, bool hooks) {
    tracker::TrackOptions o;
    if (!config.empty()) o.config = refdetect::load_config(config);
    o.emit_evolution_hooks = hooks;
    return o;
}

evalkit::LineRange parse_range(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("range", "expected START,END");
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change history of Java code blocks in git repositories"};
    app.require_subcommand(1);

    std::string repo_path = ".", commit = "HEAD", file, type, config;
    int line = 0;
    bool hooks = false;
    auto* track = app.add_subcommand("track", "Print the change history graph of one block as JSON");
    track->add_option("--repo", repo_path, "Repository directory")->capture_default_str();
    track->add_option("--commit", commit, "Start commit")->capture_default_str();
    track->add_option("--file", file, "File path at the start commit")->required();
    track->add_option("--type", type, "Block kind")->required()->check(CLI::IsMember(facade::supported_block_types()));
    track->add_option("--line", line, "Start line of the block")->required()->check(CLI::PositiveNumber);
    track->add_option("--config", config, "Threshold and pattern overrides");
    track->add_flag("--hooks", hooks, "Record extract/split/move events in the graph");

    std::vector<std::string> histories, oracles;
    std::string level = "change", format = "json";
    bool fair = false;
    auto* score = app.add_subcommand("score", "Score tracked histories against oracle files");
    score->add_option("--history", histories, "Graph JSON (repeatable, paired with --oracle)")->required();
    score->add_option("--oracle", oracles, "Oracle JSON (repeatable)")->required();
    score->add_option("--level", level, "commit or change")->check(CLI::IsMember({"commit", "change"}))
        ->capture_default_str();
    score->add_flag("--baseline-fair", fair, "Ignore secondary fork branches");
    score->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();

    auto* baseline = app.add_subcommand("baseline", "Baselines for comparison");
    baseline->require_subcommand(1);
    std::string range_text, introduction;
    std::vector<std::string> corrections;
    auto* gitlog = baseline->add_subcommand("git-log", "Commits reported by git log -L for a line range");
    gitlog->add_option("--repo", repo_path, "Repository directory")->capture_default_str();
    gitlog->add_option("--commit", commit, "Start commit")->capture_default_str();
    gitlog->add_option("--file", file, "File path")->required();
    gitlog->add_option("--range", range_text, "START,END lines at the start commit")->required();
    gitlog->add_option("--introduction", introduction, "Drop commits older than this one");
    gitlog->add_option("--correction", corrections, "COMMIT:START,END range valid at a reformatting commit");

    auto* timing = app.add_subcommand("time", "Track one block and report time per resolution step");
    timing->add_option("--repo", repo_path, "Repository directory")->capture_default_str();
    timing->add_option("--commit", commit, "Start commit")->capture_default_str();
    timing->add_option("--file", file, "File path at the start commit")->required();
    timing->add_option("--type", type, "Block kind")->required()->check(CLI::IsMember(facade::supported_block_types()));
    timing->add_option("--line", line, "Start line of the block")->required()->check(CLI::PositiveNumber);
    timing->add_option("--config", config, "Threshold and pattern overrides");

    int port = 8080;
    std::string host = "127.0.0.1", workspace = "blocktrace-workspace", sessions;
    auto* serve = app.add_subcommand("serve", "Run the REST service");
    serve->add_option("--port", port, "Port")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--workspace", workspace, "Directory for clones of remote repositories")->capture_default_str();
    serve->add_option("--sessions", sessions, "Directory for session checkpoints");
    serve->add_option("--config", config, "Threshold and pattern overrides");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*track) {
            gitio::Repository repo(repo_path);
            const auto graph = tracker::track(repo, file, type, line, commit, track_options(config, hooks));
            std::cout << facade::graph_payload(graph);
        } else if (*score) {
            if (histories.size() != oracles.size()) throw Error("--history and --oracle must come in pairs");
            const auto lvl = *evalkit::parse_level(level);
            std::vector<evalkit::ScoreReport> reports;
            for (std::size_t i = 0; i < histories.size(); ++i) {
                reports.push_back(evalkit::score(tracker::graph_from_json(read_json(histories[i])),
                                                 evalkit::oracle_from_json(read_json(oracles[i])), lvl, {fair}));
            }
            const auto total = evalkit::aggregate(reports, lvl);
            if (format == "json") {
                json out = {{"reports", json::array()}, {"aggregate", evalkit::to_json(total)}};
                for (const auto& r : reports) out["reports"].push_back(evalkit::to_json(r));
                std::cout << out.dump(2) << "\n";
            } else {
                std::printf("%-40s %6s %6s %6s %9s %9s\n", "history", "tp", "fp", "fn", "precision", "recall");
                auto row = [](const std::string& name, const evalkit::ScoreReport& r) {
                    std::printf("%-40s %6zu %6zu %6zu %8.2f%% %8.2f%%\n", name.c_str(), r.tp, r.fp, r.fn,
                                r.precision * 100, r.recall * 100);
                };
                for (std::size_t i = 0; i < reports.size(); ++i) row(histories[i], reports[i]);
                row("overall (" + level + " level)", total);
            }
        } else if (*gitlog) {
            gitio::Repository repo(repo_path);
            evalkit::BaselineOptions options;
            if (!introduction.empty()) options.introduction = introduction;
            for (const auto& c : corrections) {
                const auto colon = c.find(':');
                if (colon == std::string::npos) throw Error("--correction expects COMMIT:START,END");
                options.corrections[repo.resolve(c.substr(0, colon)).id] = parse_range(c.substr(colon + 1));
            }
            try {
                std::cout << json(evalkit::gitlog_baseline(repo, file, parse_range(range_text), commit, options)).dump(2)
                          << "\n";
            } catch (const evalkit::RangeRestartNeeded& e) {
                std::cout << json{{"restartAt", e.commit_id()}}.dump(2) << "\n";
                std::cerr << "blocktrace: " << e.what() << "; pass --correction " << e.commit_id() << ":START,END\n";
                return 3;
            }
        } else if (*timing) {
            gitio::Repository repo(repo_path);
            std::cout << evalkit::to_json(evalkit::time_session(repo, file, type, line, commit,
                                                                track_options(config, false)))
                             .dump(2)
                      << "\n";
        } else if (*serve) {
            facade::ServiceOptions options;
            options.workspace = workspace;
            options.sessions_dir = sessions;
            options.track = track_options(config, false);
            facade::Service service(options);
            httplib::Server server;
            facade::mount(server, service);
            std::cerr << "blocktrace: listening on " << host << ":" << port << "\n";
            if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const srcmodel::CodeElementNotFound& e) {
        std::cerr << "blocktrace: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "blocktrace: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
