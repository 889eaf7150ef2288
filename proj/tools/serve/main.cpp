// evatrap-serve: in-memory trap sessions over HTTP for the interactive UI.

#include <evatrap/evatrap.h>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Settings {
    std::string data_dir;
    std::string config_dir;
    unsigned threads = 1;
    std::chrono::seconds idle{3600};
};

// Requests on one session run one at a time in arrival order.
class TicketLock {
public:
    void lock() {
        std::unique_lock lk(m_);
        const unsigned long mine = next_++;
        cv_.wait(lk, [&] { return serving_ == mine; });
    }
    void unlock() {
        std::lock_guard lk(m_);
        ++serving_;
        cv_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    unsigned long next_ = 0, serving_ = 0;
};

struct Session {
    std::string id;
    json config;
    json info;
    evatrap_model* model = nullptr;
    evatrap_result* result = nullptr;
    std::vector<double> sliders_W;
    TicketLock lock;
    std::atomic<Clock::rep> last_used{Clock::now().time_since_epoch().count()};

    ~Session() {
        evatrap_result_free(result);
        evatrap_model_free(model);
    }
    void touch() { last_used = Clock::now().time_since_epoch().count(); }
};

class Registry {
public:
    std::shared_ptr<Session> find(const std::string& id) {
        std::lock_guard lk(m_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return nullptr;
        it->second->touch();
        return it->second;
    }
    void add(std::shared_ptr<Session> s) {
        std::lock_guard lk(m_);
        sessions_[s->id] = std::move(s);
    }
    bool remove(const std::string& id) {
        std::lock_guard lk(m_);
        return sessions_.erase(id) > 0;
    }
    std::size_t expire(std::chrono::seconds idle) {
        std::lock_guard lk(m_);
        const auto now = Clock::now().time_since_epoch().count();
        const auto limit = std::chrono::duration_cast<Clock::duration>(idle).count();
        std::size_t n = 0;
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            if (now - it->second->last_used.load() > limit) {
                it = sessions_.erase(it);
                ++n;
            } else {
                ++it;
            }
        }
        return n;
    }
    std::size_t size() {
        std::lock_guard lk(m_);
        return sessions_.size();
    }

private:
    std::mutex m_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

std::string new_id() {
    static std::mutex m;
    static std::random_device rd;
    static std::mt19937_64 rng(rd());
    std::lock_guard lk(m);
    static const char* hex = "0123456789abcdef";
    std::string id;
    for (int k = 0; k < 2; ++k) {
        auto v = rng();
        for (int i = 0; i < 16; ++i, v >>= 4) id += hex[v & 15];
    }
    return id;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

int http_status(evatrap_status s) {
    switch (s) {
    case EVATRAP_ERR_CONFIG:
    case EVATRAP_ERR_INVALID_ARGUMENT: return 400;
    case EVATRAP_ERR_PHYSICS:
    case EVATRAP_ERR_IO: return 422;
    case EVATRAP_ERR_NOT_FOUND: return 404;
    default: return 500;
    }
}

// Sends the error response and returns false when the call failed.
bool ok(evatrap_status s, httplib::Response& res) {
    if (s == EVATRAP_OK) return true;
    send_json(res, http_status(s), {{"error", evatrap_last_error()}, {"kind", evatrap_status_name(s)}});
    return false;
}

json take(char* text) {
    json j = json::parse(text);
    evatrap_free_string(text);
    return j;
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
        json body = json::parse(req.body);
        if (!body.is_object()) {
            send_error(res, 400, "request body must be a JSON object");
            return std::nullopt;
        }
        return body;
    } catch (const json::parse_error& e) {
        send_error(res, 400, std::string("malformed JSON: ") + e.what());
        return std::nullopt;
    }
}

const char* kPlaceholderUi =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>evatrap</title></head>"
    "<body><p>The UI bundle is not installed. Start the server with --ui-dir pointing at the built "
    "front end, or use the JSON API under /sessions.</p></body></html>";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive trap session service"};
    Settings settings;
    std::string bind = "127.0.0.1", ui_dir;
    int port = 8731;
    long idle_s = 3600;
    app.add_option("--bind", bind, "address to listen on");
    app.add_option("--port", port, "port, 0 picks a free one");
    app.add_option("--threads", settings.threads, "engine threads per request, 0 for all cores");
    app.add_option("--data-dir", settings.data_dir, "atomic and material data directory");
    app.add_option("--config-dir", settings.config_dir, "base directory for relative paths in posted configs");
    app.add_option("--ui-dir", ui_dir, "static front-end files served under /ui");
    app.add_option("--idle-timeout", idle_s, "seconds before an unused session is dropped")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    settings.idle = std::chrono::seconds(idle_s);

    Registry sessions;
    httplib::Server server;

    server.Get("/healthz", [&](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}, {"version", evatrap_version()}, {"sessions", sessions.size()}});
    });

    // Body: the config document itself, or {"config": {...}, "base_dir": "..."}.
    server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        json config = *body;
        std::string base_dir = settings.config_dir;
        if (body->contains("config") && (*body)["config"].is_object()) {
            config = (*body)["config"];
            if (body->contains("base_dir")) base_dir = (*body)["base_dir"].get<std::string>();
        }
        auto s = std::make_shared<Session>();
        s->id = new_id();
        s->config = config;
        const std::string text = config.dump();
        if (!ok(evatrap_model_parse(text.c_str(), base_dir.empty() ? nullptr : base_dir.c_str(),
                                    settings.data_dir.empty() ? nullptr : settings.data_dir.c_str(), &s->model),
                res))
            return;
        char* info = nullptr;
        if (!ok(evatrap_model_info(s->model, &info), res)) return;
        s->info = take(info);
        for (const auto& sl : s->info["sliders"]) s->sliders_W.push_back(sl["default_W"].get<double>());
        json out = s->info;
        out["id"] = s->id;
        sessions.add(s);
        send_json(res, 201, out);
    });

    server.Get(R"(/sessions/([0-9a-f]+))", [&](const httplib::Request& req, httplib::Response& res) {
        auto s = sessions.find(req.matches[1]);
        if (!s) return send_error(res, 404, "unknown session");
        std::lock_guard lk(s->lock);
        json out = s->info;
        out["id"] = s->id;
        out["powers_W"] = s->sliders_W;
        send_json(res, 200, out);
    });

    server.Delete(R"(/sessions/([0-9a-f]+))", [&](const httplib::Request& req, httplib::Response& res) {
        if (!sessions.remove(req.matches[1])) return send_error(res, 404, "unknown session");
        res.status = 204;
    });

    // Body: {"powers_mW": {"name": value, ...}} (missing names keep their
    // current value) or {"sliders_mW": [...]} in slider order.
    server.Post(R"(/sessions/([0-9a-f]+)/powers)", [&](const httplib::Request& req, httplib::Response& res) {
        auto s = sessions.find(req.matches[1]);
        if (!s) return send_error(res, 404, "unknown session");
        auto body = parse_body(req, res);
        if (!body) return;
        std::lock_guard lk(s->lock);
        std::vector<double> sliders = s->sliders_W;
        const auto& names = s->info["sliders"];
        try {
            if (body->contains("sliders_mW")) {
                const auto& v = (*body)["sliders_mW"];
                if (!v.is_array() || v.size() != sliders.size())
                    return send_error(res, 400, "sliders_mW must list one power per slider");
                for (std::size_t k = 0; k < sliders.size(); ++k) sliders[k] = v[k].get<double>() * 1e-3;
            }
            if (body->contains("powers_mW")) {
                const auto& v = (*body)["powers_mW"];
                if (!v.is_object()) return send_error(res, 400, "powers_mW must map slider names to powers");
                for (const auto& [name, p] : v.items()) {
                    std::size_t k = 0;
                    while (k < names.size() && names[k]["name"] != name) ++k;
                    if (k == names.size()) return send_error(res, 400, "unknown slider '" + name + "'");
                    sliders[k] = p.get<double>() * 1e-3;
                }
            }
        } catch (const json::exception&) {
            return send_error(res, 400, "powers must be numbers");
        }
        for (std::size_t k = 0; k < sliders.size(); ++k)
            if (!(sliders[k] >= 0))
                return send_error(res, 400, "power of '" + names[k]["name"].get<std::string>() + "' must be >= 0");

        evatrap_result* result = nullptr;
        if (!ok(evatrap_model_compute(s->model, sliders.data(), sliders.size(), settings.threads, 0, &result), res))
            return;
        char* payload = nullptr;
        if (!ok(evatrap_result_payload(result, &payload), res)) {
            evatrap_result_free(result);
            return;
        }
        evatrap_result_free(s->result);
        s->result = result;
        s->sliders_W = sliders;
        json out = take(payload);
        out["powers_W"] = sliders;
        send_json(res, 200, out);
    });

    server.Get(R"(/sessions/([0-9a-f]+)/decomposition)", [&](const httplib::Request& req, httplib::Response& res) {
        auto s = sessions.find(req.matches[1]);
        if (!s) return send_error(res, 404, "unknown session");
        long long point = 0, sheet = 0, level = 0;
        try {
            if (!req.has_param("point")) return send_error(res, 400, "query parameter 'point' is required");
            point = std::stoll(req.get_param_value("point"));
            if (req.has_param("sheet")) sheet = std::stoll(req.get_param_value("sheet"));
            if (req.has_param("level")) level = std::stoll(req.get_param_value("level"));
        } catch (const std::exception&) {
            return send_error(res, 400, "point, sheet and level must be integers");
        }
        if (point < 0 || sheet < 0 || level < 0) return send_error(res, 400, "indices must be non-negative");
        std::lock_guard lk(s->lock);
        if (!s->result &&
            !ok(evatrap_model_compute(s->model, s->sliders_W.data(), s->sliders_W.size(), settings.threads, 0,
                                      &s->result),
                res))
            return;
        char* text = nullptr;
        if (!ok(evatrap_result_decomposition(s->result, static_cast<size_t>(level), static_cast<size_t>(point),
                                             static_cast<int>(sheet), &text),
                res))
            return;
        send_json(res, 200, take(text));
    });

    if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) {
        server.set_mount_point("/ui", ui_dir);
    } else {
        server.Get("/ui", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kPlaceholderUi, "text/html");
        });
        server.Get("/ui/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kPlaceholderUi, "text/html");
        });
    }

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    std::atomic<bool> running{true};
    std::thread reaper([&] {
        while (running) {
            for (int i = 0; i < 10 && running; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            sessions.expire(settings.idle);
        }
    });

    if (port == 0) {
        port = server.bind_to_any_port(bind);
    } else if (!server.bind_to_port(bind, port)) {
        port = -1;
    }
    if (port < 0) {
        std::cerr << "error: cannot listen on " << bind << '\n';
        running = false;
        reaper.join();
        return 4;
    }
    std::cout << "listening on http://" << bind << ':' << port << std::endl;
    server.listen_after_bind();
    running = false;
    reaper.join();
    return 0;
}
