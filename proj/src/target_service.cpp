#include "redos/target_service.hpp"

#include <algorithm>

#include <httplib.h>

#include "redos/forge.hpp"
#include "redos/schema_validate.hpp"

namespace redos {

namespace {

// Recursively removes maxLength to build the "no length shield" variant.
void strip_max_length(Json& node) {
    if (node.is_object()) {
        node.erase("maxLength");
        for (auto& [_, v] : node.items()) strip_max_length(v);
    } else if (node.is_array()) {
        for (auto& v : node) strip_max_length(v);
    }
}

// Matches a concrete request path against an OpenAPI template, binding
// {param} segments.
bool match_path(const std::string& tmpl, const std::string& path,
                std::map<std::string, std::string>& values) {
    std::size_t ti = 0, pi = 0;
    while (ti < tmpl.size() && pi < path.size()) {
        if (tmpl[ti] == '{') {
            std::size_t close = tmpl.find('}', ti);
            if (close == std::string::npos) return false;
            std::string name = tmpl.substr(ti + 1, close - ti - 1);
            std::size_t seg_end = path.find('/', pi);
            if (seg_end == std::string::npos) seg_end = path.size();
            values[name] = path.substr(pi, seg_end - pi);
            ti = close + 1;
            pi = seg_end;
        } else {
            if (tmpl[ti] != path[pi]) return false;
            ++ti;
            ++pi;
        }
    }
    return ti == tmpl.size() && pi == path.size();
}

}  // namespace

struct TargetService::Impl {
    ServiceConfig config;
    EngineFactory engines;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> running{false};

    explicit Impl(ServiceConfig c)
        : config(std::move(c)), engines(config.engine, config.step_budget) {
        if (config.strip_max_length) redos::strip_max_length(config.model.doc);
        server.new_task_queue = [this] {
            return new httplib::ThreadPool(std::max(config.worker_count, 1));
        };
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res);
        };
        server.Get(R"(/.*)", handler);
        server.Post(R"(/.*)", handler);
        server.Put(R"(/.*)", handler);
        server.Patch(R"(/.*)", handler);
        server.Delete(R"(/.*)", handler);
    }

    void handle(const httplib::Request& req, httplib::Response& res) {
        if (config.artificial_base_latency.count() > 0)
            std::this_thread::sleep_for(config.artificial_base_latency);

        const Json& paths = config.model.doc.contains("paths") ? config.model.doc["paths"]
                                                               : Json::object();
        for (const auto& [tmpl, item] : paths.items()) {
            std::map<std::string, std::string> path_values;
            if (!match_path(tmpl, req.path, path_values)) continue;
            std::string verb = req.method;
            std::transform(verb.begin(), verb.end(), verb.begin(), ::tolower);
            if (!item.contains(verb)) continue;

            RequestPlan plan;
            plan.method = req.method;
            plan.path_template = tmpl;
            plan.path_values = std::move(path_values);
            for (const auto& [k, v] : req.params) plan.query.emplace_back(k, v);
            for (const auto& [k, v] : req.headers) plan.headers.emplace_back(k, v);
            if (!req.body.empty()) {
                try {
                    plan.body = Json::parse(req.body);
                } catch (const nlohmann::json::parse_error& e) {
                    res.status = 400;
                    res.set_content(Json{{"violations",
                                          Json::array({Json{{"locator", "body:"},
                                                            {"constraint", "json"},
                                                            {"detail", e.what()}}})}}
                                        .dump(),
                                    "application/json");
                    return;
                }
            }

            LocalValidation v = validate_local(config.model, plan, engines);
            if (v.outcome.budget_exhausted) {
                res.status = 500;
                res.set_content(Json{{"error", "validation resource cap exceeded"}}.dump(),
                                "application/json");
                return;
            }
            if (!v.outcome.violations.empty()) {
                Json list = Json::array();
                for (const auto& viol : v.outcome.violations) list.push_back(viol.to_json());
                res.status = 400;
                res.set_content(Json{{"violations", list}}.dump(), "application/json");
                return;
            }
            res.status = 200;
            res.set_content(Json{{"echo", plan.body}}.dump(), "application/json");
            return;
        }
        res.status = 404;
        res.set_content(Json{{"error", "no such operation"}}.dump(), "application/json");
    }
};

TargetService::TargetService(ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

TargetService::~TargetService() { stop(); }

void TargetService::start() {
    if (impl_->config.port == 0) {
        port_ = impl_->server.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw BindError(0);
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", impl_->config.port))
            throw BindError(impl_->config.port);
        port_ = impl_->config.port;
    }
    impl_->running = true;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void TargetService::stop() {
    if (!impl_ || !impl_->running.exchange(false)) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace redos
