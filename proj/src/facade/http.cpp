#include "blocktrace/http.hpp"

namespace blocktrace::facade {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

/// Runs `fn`, turning exceptions into JSON error responses.
template <typename F>
void guarded(httplib::Response& res, F&& fn) {
    try {
        fn();
    } catch (const json::exception& e) {
        send_json(res, {{"error", std::string("malformed JSON: ") + e.what()}}, 422);
    } catch (const std::exception& e) {
        send_json(res, {{"error", e.what()}}, status_for(e));
    }
}

int line_param(const httplib::Request& req) {
    const auto text = req.get_param_value("line");
    try {
        std::size_t used = 0;
        const int line = std::stoi(text, &used);
        if (used == text.size() && line > 0) return line;
    } catch (const std::exception&) {
    }
    throw HttpError(422, "line must be a positive integer");
}

}  // namespace

void mount(httplib::Server& server, Service& service) {
    server.Get("/api/element-type", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto file = req.has_param("filePath") ? req.get_param_value("filePath") : req.get_param_value("file");
            send_json(res, service.element_type(req.get_param_value("repo"), req.get_param_value("commit"), file,
                                                line_param(req), req.get_param_value("selection")));
        });
    });
    server.Post("/api/track", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto r = service.track(parse_track_request(json::parse(req.body)));
            res.set_header("X-Session-Id", r.session_id);
            res.set_header("Location", "/api/session/" + r.session_id);
            res.set_content(r.payload, "application/json");
        });
    });
    server.Post("/api/session/:id/decision", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            send_json(res, service.decide(req.path_params.at("id"), parse_decision(json::parse(req.body))));
        });
    });
    server.Get("/api/session/:id", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, service.session(req.path_params.at("id"))); });
    });
}

}  // namespace blocktrace::facade
