#include "doctest.h"
#include "gauntlet.hpp"

#include "blocktrace/http.hpp"
#include "blocktrace/process.hpp"

#include <thread>

using namespace blocktrace;
using namespace blocktrace::testing;
using nlohmann::json;

namespace {

const std::string kPath = "src/main/java/p/A.java";

/// Two guarded blocks in run(); the `ready` one is edited twice.
struct Fixture {
    ScriptedRepo repo;
    std::size_t intro{0}, edit{0}, last{0};

    Fixture() {
        auto cls = [](const std::string& extra) {
            return java_class("p", "public class A",
                              {"void run() {\n    start();\n    if (ready) {\n        go();\n" + extra +
                                   "    }\n    if (other) {\n        go();\n    }\n}",
                               "void broken() {\n    int x = a == b ? 1 : 2;\n}"});
        };
        repo.write(kPath, java_class("p", "public class A", {"void run() {\n    start();\n}"})).commit("base");
        intro = repo.write(kPath, cls("")).commit("guards");
        edit = repo.write(kPath, cls("        stop();\n")).commit("stop");
        last = repo.write(kPath, cls("        stop();\n        halt();\n")).commit("halt");
        repo.write("src/main/java/p/Bad.java", "class Bad { void f( { }\n").commit("unparseable");
    }
    std::string root() { return repo.root().string(); }
    int line(const std::string& needle) { return repo.line_of(repo.size() - 1, kPath, needle); }
};

/// Service on an ephemeral port for the lifetime of the object.
struct Server {
    facade::Service service;
    httplib::Server http;
    std::thread thread;
    int port{0};

    explicit Server(facade::ServiceOptions options = {}) : service(std::move(options)) {
        facade::mount(http, service);
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~Server() {
        http.stop();
        thread.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json track_body(Fixture& f, const std::string& needle, const std::string& type = "if") {
    return {{"repoPath", f.root()}, {"filePath", kPath}, {"blockType", type}, {"line", f.line(needle)}};
}

}  // namespace

TEST_CASE("element type probing") {
    Fixture f;
    gitio::Repository repo(f.repo.root());
    const auto head = repo.resolve("HEAD");
    CHECK(facade::element_type(repo, head, kPath, f.line("if (ready)"), "if") == "if");
    CHECK(facade::element_type(repo, head, kPath, f.line("if (ready)"), "") == "if");
    CHECK(facade::element_type(repo, head, kPath, f.line("if (ready)"), "==") == "invalid");
    CHECK(facade::element_type(repo, head, kPath, f.line("if (ready)"), "while") == "invalid");
    CHECK(facade::element_type(repo, head, kPath, f.line("start();"), "start") == "invalid");

    Server s;
    auto c = s.client();
    auto get = [&](const std::string& query) { return c.Get("/api/element-type?" + query); };
    const std::string base = "repo=" + httplib::detail::encode_query_param(f.root()) + "&file=" + kPath;
    auto ok = get(base + "&line=" + std::to_string(f.line("if (ready)")) + "&selection=if");
    REQUIRE(ok);
    CHECK(ok->status == 200);
    CHECK(json::parse(ok->body).at("elementType") == "if");
    auto op = get(base + "&line=" + std::to_string(f.line("int x")) + "&selection=%3F");
    CHECK(json::parse(op->body).at("elementType") == "invalid");
    CHECK(get(base + "&line=3&commit=" + std::string(40, '0'))->status == 404);
    CHECK(get("repo=/nonexistent/repo&file=" + kPath + "&line=3")->status == 404);
    CHECK(get(base + "&line=zero")->status == 422);
    CHECK(get("repo=" + httplib::detail::encode_query_param(f.root()) + "&file=src/main/java/p/Bad.java&line=1")
              ->status == 422);
    CHECK(get("repo=" + httplib::detail::encode_query_param(f.root()) + "&file=Missing.java&line=1")->status == 404);
}

TEST_CASE("track endpoint") {
    Fixture f;
    Server s;
    auto c = s.client();
    auto res = c.Post("/api/track", track_body(f, "if (ready)").dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->has_header("X-Session-Id"));
    gitio::Repository repo(f.repo.root());
    const auto direct = tracker::track(repo, kPath, "if", f.line("if (ready)"));
    CHECK(res->body == facade::graph_payload(direct));
    CHECK(json::parse(res->body).at("nodes").size() == 3);

    auto bad_line = track_body(f, "if (ready)");
    bad_line["line"] = 1;
    CHECK(c.Post("/api/track", bad_line.dump(), "application/json")->status == 404);
    auto no_repo = track_body(f, "if (ready)");
    no_repo["repoPath"] = "/nonexistent/repo";
    CHECK(c.Post("/api/track", no_repo.dump(), "application/json")->status == 404);
    auto bad_type = track_body(f, "if (ready)");
    bad_type["blockType"] = "lambda";
    CHECK(c.Post("/api/track", bad_type.dump(), "application/json")->status == 422);
    auto both = track_body(f, "if (ready)");
    both["cloneUrl"] = "file:///x";
    CHECK(c.Post("/api/track", both.dump(), "application/json")->status == 422);
    CHECK(c.Post("/api/track", "{not json", "application/json")->status == 422);
    auto old = track_body(f, "if (ready)");
    old["commit"] = "no-such-commit";
    CHECK(c.Post("/api/track", old.dump(), "application/json")->status == 404);
}

TEST_CASE("concurrent track requests") {
    Fixture f;
    Server s;
    std::vector<std::thread> workers;
    std::vector<int> status(8, 0);
    std::vector<std::string> bodies(8);
    // built up front: the scripted repository itself is single-threaded
    const std::string requests[2] = {track_body(f, "if (other)").dump(), track_body(f, "if (ready)").dump()};
    for (int i = 0; i < 8; ++i) {
        workers.emplace_back([&, i] {
            auto c = s.client();
            auto res = c.Post("/api/track", requests[i % 2], "application/json");
            if (res) {
                status[i] = res->status;
                bodies[i] = res->body;
            }
        });
    }
    for (auto& w : workers) w.join();
    for (int i = 0; i < 8; ++i) {
        CHECK(status[i] == 200);
        CHECK(bodies[i] == bodies[i % 2]);
    }
}

TEST_CASE("clone URLs are cloned into the workspace once") {
    Fixture f;
    TempDir workspace;
    facade::ServiceOptions options;
    options.workspace = workspace.path();
    facade::Service service(options);
    facade::TrackRequest r;
    r.clone_url = "file://" + f.root();
    r.file_path = kPath;
    r.block_type = "if";
    r.line = f.line("if (ready)");
    const auto first = service.track(r);
    const auto second = service.track(r);
    CHECK(first.payload == second.payload);
    std::size_t clones = 0;
    for (const auto& e : std::filesystem::directory_iterator(workspace.path())) {
        clones += std::filesystem::exists(e.path() / ".git");
    }
    CHECK(clones == 1);
}

TEST_CASE("validation sessions") {
    Fixture f;
    TempDir sessions;
    facade::ServiceOptions options;
    options.sessions_dir = sessions.path();
    auto server = std::make_unique<Server>(options);
    auto c = server->client();
    auto res = c.Post("/api/track", track_body(f, "if (ready)").dump(), "application/json");
    REQUIRE(res->status == 200);
    const std::string id = res->get_header_value("X-Session-Id");
    const auto graph = json::parse(res->body);
    auto decide = [&](const json& d) { return c.Post("/api/session/" + id + "/decision", d.dump(), "application/json"); };
    auto session = [&] { return json::parse(c.Get("/api/session/" + id)->body); };

    CHECK(session().at("state") == "open");
    CHECK(c.Get("/api/session/unknown")->status == 404);
    CHECK(c.Post("/api/session/unknown/decision", json{{"commitId", "x"}, {"verdict", "confirm"}}.dump(),
                 "application/json")
              ->status == 404);
    CHECK(decide({{"commitId", std::string(40, 'a')}, {"verdict", "confirm"}})->status == 409);
    CHECK(decide({{"commitId", f.repo.id(f.last)}, {"verdict", "maybe"}})->status == 422);

    SUBCASE("confirming every node yields an oracle that scores tp-only") {
        for (const auto& n : graph.at("nodes")) {
            auto r = decide({{"commitId", n.at("commitId")}, {"verdict", "confirm"}});
            CHECK(r->status == 200);
            CHECK(json::parse(r->body).at("status") == "recorded");
        }
        const auto state = session();
        CHECK(state.at("state") == "confirmed");
        const auto oracle = evalkit::oracle_from_json(state.at("oracle"));
        const auto g = tracker::graph_from_json(state.at("graph"));
        for (auto level : {evalkit::Level::commit, evalkit::Level::change}) {
            const auto r = evalkit::score(g, oracle, level);
            CHECK(r.fp == 0);
            CHECK(r.fn == 0);
            CHECK(r.tp > 0);
        }
        // Checkpoints survive a restart of the service.
        server.reset();
        facade::Service reloaded(options);
        CHECK(reloaded.session(id) == state);
    }
    SUBCASE("reject without a correction leaves the session unresolved") {
        auto r = decide({{"commitId", f.repo.id(f.edit)}, {"verdict", "reject"}});
        CHECK(json::parse(r->body).at("status") == "unresolved");
        CHECK(session().at("state") == "unresolved");
    }
    SUBCASE("reject with a correction resumes from the parent and splices the suffix") {
        // Claim that the version at `edit` came from the other guard.
        const int other_line = f.repo.line_of(f.intro, kPath, "if (other)");
        auto r = decide({{"commitId", f.repo.id(f.edit)},
                         {"verdict", "reject"},
                         {"correction", {{"file", kPath}, {"blockType", "if"}, {"line", other_line}}}});
        REQUIRE(r->status == 200);
        const auto body = json::parse(r->body);
        CHECK(body.at("status") == "resumed");
        CHECK(body.at("resumedFrom") == f.repo.id(f.intro));
        const auto g = tracker::graph_from_json(session().at("graph"));
        REQUIRE(g.nodes.size() == 3);
        CHECK(g.nodes[0].commit.id == f.repo.id(f.last));
        CHECK(g.nodes[1].commit.id == f.repo.id(f.edit));
        CHECK(g.nodes[2].commit.id == f.repo.id(f.intro));
        CHECK(g.nodes[2].element.start_line == other_line);
        const auto into_edit = g.incoming(1);
        REQUIRE(into_edit.size() == 1);
        CHECK(*into_edit[0]->from == 2);
        CHECK_FALSE(into_edit[0]->changes.empty());
        CHECK(session().at("decisions").size() == 1);
    }
}

#ifdef BLOCKTRACE_CLI
TEST_CASE("command line") {
    Fixture f;
    auto cli = [](std::vector<std::string> args) {
        args.insert(args.begin(), BLOCKTRACE_CLI);
        return run_process(args);
    };
    const auto line = std::to_string(f.line("if (ready)"));
    const auto ok = cli({"track", "--repo", f.root(), "--file", kPath, "--type", "if", "--line", line});
    CHECK(ok.exit_code == 0);
    Server s;
    auto c = s.client();
    auto res = c.Post("/api/track", track_body(f, "if (ready)").dump(), "application/json");
    CHECK(ok.out == res->body);

    CHECK(cli({"track", "--repo", f.root(), "--file", kPath, "--type", "if", "--line", "1"}).exit_code == 2);
    CHECK(cli({"track", "--repo", "/nonexistent/repo", "--file", kPath, "--type", "if", "--line", line}).exit_code == 1);

    TempDir dir;
    const auto history = (dir.path() / "h.json").string();
    const auto oracle = (dir.path() / "o.json").string();
    {
        std::ofstream(history) << ok.out;
        gitio::Repository repo(f.repo.root());
        const auto g = tracker::graph_from_json(json::parse(ok.out));
        std::ofstream(oracle) << evalkit::to_json(evalkit::oracle_from_graph(g, "fixture", kPath, "if")).dump();
    }
    const auto scored = cli({"score", "--history", history, "--oracle", oracle, "--level", "commit"});
    CHECK(scored.exit_code == 0);
    const auto report = json::parse(scored.out);
    CHECK(report.at("aggregate").at("precision") == 1.0);
    CHECK(report.at("aggregate").at("tp") == 3);
    const auto table = cli({"score", "--history", history, "--oracle", oracle, "--format", "table"});
    CHECK(table.out.find("overall") != std::string::npos);

    const auto range = line + "," + std::to_string(f.line("if (ready)") + 4);
    const auto base = cli({"baseline", "git-log", "--repo", f.root(), "--file", kPath, "--range", range,
                           "--introduction", f.repo.id(f.intro)});
    CHECK(base.exit_code == 0);
    CHECK(json::parse(base.out) == json::array({f.repo.id(f.last), f.repo.id(f.edit), f.repo.id(f.intro)}));

    const auto timed = cli({"time", "--repo", f.root(), "--file", kPath, "--type", "if", "--line", line});
    CHECK(timed.exit_code == 0);
    CHECK(json::parse(timed.out).at("commits").size() == 3);
    CHECK(cli({"track", "--file", kPath}).exit_code != 0);
}
#endif
