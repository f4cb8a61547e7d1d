#pragma once

#include <atomic>
#include <memory>
#include <thread>

#include "redos/engines.hpp"
#include "redos/openapi.hpp"

namespace redos {

struct BindError : std::runtime_error {
    explicit BindError(int port)
        : std::runtime_error("cannot bind port " + std::to_string(port)) {}
};

struct ServiceConfig {
    ApiModel model;
    EngineKind engine = EngineKind::Backtracking;
    std::uint64_t step_budget = 1ULL << 62;  // exhaustion maps to a 500
    int port = 0;                            // 0 = any free port
    int worker_count = 1;                    // serialized handling by default
    std::chrono::milliseconds artificial_base_latency{0};
    bool strip_max_length = false;  // "no length shield" victim variant
};

// In-repo victim/mitigation-demo service: validates every request against
// the document with the configured engine; failing requests get a 400 with
// a machine-readable violation list, passing requests a 200 echo, engine
// budget exhaustion a 500.
class TargetService {
public:
    explicit TargetService(ServiceConfig config);
    ~TargetService();

    TargetService(const TargetService&) = delete;
    TargetService& operator=(const TargetService&) = delete;

    void start();  // binds and serves on a background thread; throws BindError
    void stop();   // clean shutdown, safe from another thread

    int port() const { return port_; }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace redos
