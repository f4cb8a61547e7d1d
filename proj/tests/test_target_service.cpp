#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "redos/forge.hpp"
#include "redos/prober.hpp"
#include "redos/target_service.hpp"

using namespace redos;

namespace {

std::string read_fixture(const char* name) {
    std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

ApiModel fixture_model(const char* name = "target_api.json") {
    return load_openapi(read_fixture(name), DocumentFormat::Json, name);
}

// Points the fixture surface (which declares port 8080) at the live service.
ApiSurface surface_for(const ApiModel& model, const TargetService& service) {
    auto surfaces = extract_surfaces(model);
    REQUIRE(!surfaces.empty());
    ApiSurface s = surfaces[0];
    s.server_url = service.base_url();
    return s;
}

TransportResult roundtrip(TargetService& service, const RequestPlan& plan) {
    auto transport = make_http_transport();
    return transport->send(plan);
}

}  // namespace

TEST_CASE("target service: valid request echoes with a 200") {
    ServiceConfig config;
    config.model = fixture_model();
    TargetService service(config);
    service.start();
    CHECK(service.port() > 0);

    ApiSurface s = surface_for(config.model, service);
    RequestPlan valid = build_request(s, {}, 5);
    TransportResult r = roundtrip(service, valid);
    REQUIRE(r.ok);
    CHECK(r.status == 200);
    Json body = Json::parse(r.body);
    CHECK(body["echo"] == valid.body);
    service.stop();
}

TEST_CASE("target service: violations come back as a 400 list") {
    ServiceConfig config;
    config.model = fixture_model();
    TargetService service(config);
    service.start();
    ApiSurface s = surface_for(config.model, service);

    SUBCASE("missing required field") {
        RequestPlan plan = build_request(s, {}, 5);
        plan.body.erase("qty");
        TransportResult r = roundtrip(service, plan);
        REQUIRE(r.ok);
        CHECK(r.status == 400);
        Json body = Json::parse(r.body);
        REQUIRE(body["violations"].is_array());
        CHECK(body["violations"][0]["constraint"] == "required");
    }
    SUBCASE("pattern mismatch") {
        RequestPlan plan = build_request(s, {}, 5);
        plan.body["customer"] = "zzz";
        TransportResult r = roundtrip(service, plan);
        REQUIRE(r.ok);
        CHECK(r.status == 400);
        Json body = Json::parse(r.body);
        bool pattern_named = false;
        for (const auto& v : body["violations"])
            if (v["constraint"] == "pattern") pattern_named = true;
        CHECK(pattern_named);
    }
    SUBCASE("unknown route") {
        RequestPlan plan = build_request(s, {}, 5);
        plan.url = service.base_url() + "/nowhere";
        plan.path_template = "/nowhere";
        CHECK(roundtrip(service, plan).status == 404);
    }
    service.stop();
}

TEST_CASE("target service: budget exhaustion surfaces as a 500") {
    ServiceConfig config;
    config.model = fixture_model();
    config.step_budget = 1'000'000;  // far below an exponential blowup
    TargetService service(config);
    service.start();
    ApiSurface s = surface_for(config.model, service);

    StaticReport report = analyze(s.pattern, s.anchor_mode);
    REQUIRE(report.attack.has_value());
    RequestPlan probe = inject_probe(build_request(s, {}, 5), s, *report.attack, 40);
    TransportResult r = roundtrip(service, probe);
    REQUIRE(r.ok);
    CHECK(r.status == 500);
    service.stop();
}

TEST_CASE("target service: the safe engine answers the same probe quickly") {
    ServiceConfig config;
    config.model = fixture_model();
    config.engine = EngineKind::LinearSafe;
    TargetService service(config);
    service.start();
    ApiSurface s = surface_for(config.model, service);

    StaticReport report = analyze(s.pattern, s.anchor_mode);
    REQUIRE(report.attack.has_value());
    RequestPlan probe = inject_probe(build_request(s, {}, 5), s, *report.attack, 40);
    TransportResult r = roundtrip(service, probe);
    REQUIRE(r.ok);
    CHECK(r.status == 400);  // rejected, not stuck
    CHECK(r.rtt < std::chrono::duration<double>(0.1));
    service.stop();
}

TEST_CASE("target service: length shield and its removal") {
    ServiceConfig config;
    config.model = fixture_model("target_api_shielded.json");
    TargetService service(config);
    service.start();
    ApiSurface s = surface_for(config.model, service);

    StaticReport report = analyze(s.pattern, s.anchor_mode);
    REQUIRE(report.attack.has_value());
    std::string long_probe = report.attack->instantiate(200);
    REQUIRE(long_probe.size() > 16);

    RequestPlan plan = build_request(s, {}, 5);
    plan.body["sku"] = long_probe;
    TransportResult r = roundtrip(service, plan);
    REQUIRE(r.ok);
    REQUIRE(r.status == 400);
    for (const auto& v : Json::parse(r.body)["violations"])
        CHECK(v["constraint"] == "maxLength");  // the pattern is shielded
    service.stop();

    ServiceConfig unshielded = config;
    unshielded.strip_max_length = true;
    unshielded.step_budget = 1'000'000;
    TargetService service2(unshielded);
    service2.start();
    plan.url = service2.base_url() + "/items";
    CHECK(roundtrip(service2, plan).status == 500);  // now the pattern runs and blows the budget
    service2.stop();
}

TEST_CASE("target service: behavior matches local validation") {
    ServiceConfig config;
    config.model = fixture_model();
    TargetService service(config);
    service.start();
    ApiSurface s = surface_for(config.model, service);
    EngineFactory engines(EngineKind::Backtracking);

    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        RequestPlan plan = build_request(s, {}, seed);
        if (seed % 2 == 0) plan.body["customer"] = "not-a-match";
        bool local_ok = validate_local(config.model, plan, engines).passed();
        TransportResult r = roundtrip(service, plan);
        REQUIRE(r.ok);
        CHECK((r.status == 200) == local_ok);
    }
    service.stop();
}

TEST_CASE("target service: stop is clean and idempotent") {
    ServiceConfig config;
    config.model = fixture_model();
    TargetService service(config);
    service.start();
    int port = service.port();
    service.stop();
    service.stop();

    // The port is free again for a fresh instance.
    (void)port;
    TargetService service2(config);
    service2.start();
    CHECK(service2.port() > 0);
    service2.stop();
}
