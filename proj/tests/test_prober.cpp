#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "redos/prober.hpp"

using namespace redos;

namespace {

using Seconds = std::chrono::duration<double>;

ProbeEntry entry(double rtt, int status = 200) {
    ProbeEntry e;
    e.ok = true;
    e.status = status;
    e.rtt = Seconds(rtt);
    return e;
}

StepLog step(std::vector<double> treatment, std::vector<double> control) {
    StepLog s;
    for (double t : treatment) s.treatment.push_back(entry(t));
    for (double c : control) s.control.push_back(entry(c));
    return s;
}

ProbeLog log_of(std::vector<StepLog> steps, bool baseline_valid = true,
                HaltReason halt = HaltReason::None) {
    ProbeLog log;
    log.baseline_valid = baseline_valid;
    log.steps = std::move(steps);
    log.halt_reason = halt;
    return log;
}

// A surface whose single body field carries the pattern under test.
ApiSurface make_surface(const std::string& pattern, const std::string& server) {
    ApiSurface s;
    s.source_document = "synthetic";
    s.server_url = server;
    s.path_template = "/check";
    s.method = "POST";
    s.field_locator = {FieldLocator::Kind::Body, "/f"};
    s.pattern = pattern;
    s.anchor_mode = AnchorMode::UnanchoredSearch;
    s.body_schema = Json::parse(
        R"({"type": "object", "required": ["f"],
            "properties": {"f": {"type": "string", "pattern": ")" +
        pattern + R"("}}})");
    return s;
}

// Scripted transport: per-request behavior chosen by a callback; records every
// plan it was handed.
struct FakeTransport : Transport {
    std::function<TransportResult(const RequestPlan&, std::size_t)> script;
    std::vector<RequestPlan> sent;

    TransportResult send(const RequestPlan& plan) override {
        std::size_t n = sent.size();
        sent.push_back(plan);
        return script(plan, n);
    }
};

TransportResult respond(int status, double rtt, const std::string& body = "") {
    TransportResult r;
    r.ok = true;
    r.status = status;
    r.rtt = Seconds(rtt);
    r.body = body;
    return r;
}

PumpCalibration ladder_of(std::vector<std::size_t> pump_counts) {
    PumpCalibration cal;
    for (std::size_t k : pump_counts) {
        CalibrationEntry e;
        e.target = Seconds(0.2 * double(cal.ladder.size() + 1));
        e.pump_count = k;
        cal.ladder.push_back(e);
    }
    return cal;
}

DynamicClassification exponential_cls() {
    DynamicClassification cls;
    cls.cls = DynamicClassification::Class::Exponential;
    cls.severity = DynamicClassification::Severity::High;
    return cls;
}

ProbePlan make_plan(const ApiSurface& surface, const ProbeConfig& config,
                    std::vector<std::size_t> pump_counts) {
    StaticReport r = analyze(surface.pattern, surface.anchor_mode);
    REQUIRE(r.attack.has_value());
    return plan_probe(surface, *r.attack, exponential_cls(), ladder_of(std::move(pump_counts)),
                      config);
}

}  // namespace

TEST_CASE("decide: representative log table") {
    Thresholds th;  // 1.0s

    // 1. Deviation at or above the threshold.
    Verdict v = decide(log_of({step({2.0, 2.1, 2.0}, {0.1, 0.1, 0.1})}), th);
    CHECK(v.outcome == Outcome::VulnerableConditions1to3);

    // 2. Deviation wins even when the baseline never validated.
    v = decide(log_of({step({2.0, 2.0, 2.0}, {0.1, 0.1, 0.1})}, false), th);
    CHECK(v.outcome == Outcome::VulnerableConditions1to3);
    CHECK(!v.baseline_valid);

    // 3. Flat timings with a valid baseline.
    v = decide(log_of({step({0.1, 0.1, 0.1}, {0.1, 0.1, 0.1})}), th);
    CHECK(v.outcome == Outcome::SafeEngine);
    CHECK(!v.manual_follow_up);

    // 4. Flat timings without a valid baseline.
    v = decide(log_of({step({0.1, 0.1, 0.1}, {0.1, 0.1, 0.1})}, false), th);
    CHECK(v.outcome == Outcome::Inconclusive);

    // 5. A halt preempts an otherwise clear deviation.
    v = decide(log_of({step({3.0, 3.0, 3.0}, {0.1, 0.1, 0.1})}, true, HaltReason::ServerError), th);
    CHECK(v.outcome == Outcome::HaltedUnsafe);

    // 6. Halt on an overlong response with no steps at all.
    v = decide(log_of({}, true, HaltReason::OverlongResponse), th);
    CHECK(v.outcome == Outcome::HaltedUnsafe);

    // 7. Deviation exactly at the threshold counts.
    v = decide(log_of({step({1.1, 1.1, 1.1}, {0.1, 0.1, 0.1})}), th);
    CHECK(v.step_deviations[0] == doctest::Approx(1.0));
    CHECK(v.outcome == Outcome::VulnerableConditions1to3);

    // 8. Positive but sub-threshold deviation flags manual follow-up.
    v = decide(log_of({step({0.5, 0.5, 0.5}, {0.1, 0.1, 0.1})}), th);
    CHECK(v.outcome == Outcome::SafeEngine);
    CHECK(v.manual_follow_up);

    // 9. Slow first treatment followed by fast repeats flags caching.
    v = decide(log_of({step({2.5, 0.1, 0.1, 0.1, 0.1}, {0.1, 0.1, 0.1, 0.1, 0.1})}), th);
    CHECK(v.outcome == Outcome::SafeEngine);
    CHECK(v.caching_flag);

    // 10. Negative deviation is neither vulnerable nor follow-up-worthy.
    v = decide(log_of({step({0.1, 0.1, 0.1}, {0.5, 0.5, 0.5})}), th);
    CHECK(v.outcome == Outcome::SafeEngine);
    CHECK(!v.manual_follow_up);

    // 11. A single deviant step among flat ones suffices.
    v = decide(log_of({step({0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}),
                       step({0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}),
                       step({1.9, 2.0, 2.1}, {0.1, 0.1, 0.1})}),
               th);
    CHECK(v.outcome == Outcome::VulnerableConditions1to3);
    CHECK(v.step_deviations.size() == 3);

    // 12. Medians resist a single outlier in either group.
    v = decide(log_of({step({0.1, 0.1, 0.1, 0.1, 9.0}, {0.1, 0.1, 0.1, 0.1, 0.1})}), th);
    CHECK(v.outcome == Outcome::SafeEngine);
}

TEST_CASE("decide: raising the threshold never strengthens the verdict") {
    std::vector<ProbeLog> logs = {
        log_of({step({2.0, 2.0, 2.0}, {0.1, 0.1, 0.1})}),
        log_of({step({0.6, 0.6, 0.6}, {0.1, 0.1, 0.1})}),
        log_of({step({0.1, 0.1, 0.1}, {0.1, 0.1, 0.1})}, false),
    };
    for (const auto& log : logs) {
        Outcome low = decide(log, Thresholds{Seconds(0.3)}).outcome;
        Outcome high = decide(log, Thresholds{Seconds(3.0)}).outcome;
        if (high == Outcome::VulnerableConditions1to3)
            CHECK(low == Outcome::VulnerableConditions1to3);
    }
}

TEST_CASE("plan_probe: drops oversize steps, rejects an empty ladder") {
    ApiSurface s = make_surface("(a|a)*b", "http://h.example");
    StaticReport r = analyze(s.pattern, s.anchor_mode);
    REQUIRE(r.attack.has_value());

    ProbeConfig config;
    config.max_probe_length = 16;
    ProbePlan plan = plan_probe(s, *r.attack, exponential_cls(), ladder_of({4, 4000}), config);
    CHECK(plan.ladder.size() == 1);
    CHECK(plan.warnings.size() == 1);

    CHECK_THROWS_AS(plan_probe(s, *r.attack, exponential_cls(), ladder_of({4000, 8000}), config),
                    EmptyLadder);

    DynamicClassification linear;
    CHECK_THROWS_AS(plan_probe(s, *r.attack, linear, ladder_of({4}), config),
                    std::invalid_argument);
}

TEST_CASE("establish_baseline: retry and reachability rules") {
    ApiSurface s = make_surface("(a|a)*b", "http://h.example");
    ProbeConfig config;
    config.rate_floor = std::chrono::milliseconds(1);
    ProbePlan plan = make_plan(s, config, {2});
    RequestPlan valid = build_request(s, {}, 1);

    SUBCASE("dead host after every retry") {
        FakeTransport t;
        t.script = [](const RequestPlan&, std::size_t) { return TransportResult{}; };
        ProbeLog log;
        establish_baseline(plan, valid, t, log);
        CHECK(log.unreachable);
        CHECK(log.baseline_attempts.size() == config.baseline_retries);
    }
    SUBCASE("live but non-2XX host proceeds without a valid baseline") {
        FakeTransport t;
        t.script = [](const RequestPlan&, std::size_t) { return respond(404, 0.01); };
        ProbeLog log;
        establish_baseline(plan, valid, t, log);
        CHECK(!log.unreachable);
        CHECK(!log.baseline_valid);
        CHECK(log.baseline_attempts.size() == 1);
    }
    SUBCASE("2XX validates immediately") {
        FakeTransport t;
        t.script = [](const RequestPlan&, std::size_t) { return respond(200, 0.01); };
        ProbeLog log;
        establish_baseline(plan, valid, t, log);
        CHECK(log.baseline_valid);
        CHECK(log.baseline_attempts.size() == 1);
    }
}

TEST_CASE("execute: interleaving, pacing, and payload classes") {
    ApiSurface s = make_surface("(a|a)*b", "http://h.example");
    ProbeConfig config;
    config.warmup_count = 2;
    config.group_size = 3;
    config.rate_floor = std::chrono::milliseconds(15);
    ProbePlan plan = make_plan(s, config, {2, 3});
    RequestPlan valid = build_request(s, {}, 1);

    FakeTransport t;
    t.script = [](const RequestPlan&, std::size_t) { return respond(200, 0.001); };
    ProbeLog log = execute(plan, valid, t);

    CHECK(log.baseline_valid);
    CHECK(log.warmups.size() == 2);
    REQUIRE(log.steps.size() == 2);
    for (const auto& step : log.steps) {
        CHECK(step.treatment.size() == 3);
        CHECK(step.control.size() == 3);
        for (const auto& e : step.treatment) CHECK(e.length == step.length);
        for (const auto& e : step.control) CHECK(e.length == step.length);
    }
    // 1 baseline + 2 warmups + 2 steps * 3 pairs.
    REQUIRE(log.send_times.size() == 15);
    for (std::size_t i = 1; i < log.send_times.size(); ++i) {
        auto gap = log.send_times[i] - log.send_times[i - 1];
        CHECK(gap >= std::chrono::milliseconds(14));  // scheduler jitter allowance
    }
    // Strict C,T interleaving after the warmups.
    for (std::size_t i = 3; i < t.sent.size(); ++i) {
        PayloadClass expect = ((i - 3) % 2 == 0) ? PayloadClass::Control : PayloadClass::Treatment;
        CHECK(t.sent[i].payload_class == expect);
    }
}

TEST_CASE("execute: a 5XX halts with no further sends") {
    ApiSurface s = make_surface("(a|a)*b", "http://h.example");
    ProbeConfig config;
    config.warmup_count = 1;
    config.group_size = 5;
    config.rate_floor = std::chrono::milliseconds(1);
    ProbePlan plan = make_plan(s, config, {2, 3});
    RequestPlan valid = build_request(s, {}, 1);

    FakeTransport t;
    t.script = [](const RequestPlan& plan, std::size_t n) {
        return (plan.payload_class == PayloadClass::Treatment && n >= 5) ? respond(500, 0.001)
                                                                         : respond(200, 0.001);
    };
    ProbeLog log = execute(plan, valid, t);
    CHECK(log.halt_reason == HaltReason::ServerError);
    CHECK(t.sent.size() == 6);  // baseline, warmup, C,T,C,T(500) — nothing after
    CHECK(log.send_times.size() == t.sent.size());
    CHECK(decide(log, Thresholds{}).outcome == Outcome::HaltedUnsafe);
}

TEST_CASE("execute: an overlong response halts") {
    ApiSurface s = make_surface("(a|a)*b", "http://h.example");
    ProbeConfig config;
    config.warmup_count = 0;
    config.rate_floor = std::chrono::milliseconds(1);
    config.halt_response_time = Seconds(0.5);
    ProbePlan plan = make_plan(s, config, {2});
    RequestPlan valid = build_request(s, {}, 1);

    FakeTransport t;
    t.script = [](const RequestPlan& plan, std::size_t) {
        return respond(200, plan.payload_class == PayloadClass::Treatment ? 0.8 : 0.001);
    };
    ProbeLog log = execute(plan, valid, t);
    CHECK(log.halt_reason == HaltReason::OverlongResponse);
    CHECK(t.sent.size() == 3);  // baseline, C, T(overlong)
}

TEST_CASE("execute: length-only 400s mark the log shielded") {
    ApiSurface s = make_surface("(a|a)*b", "http://h.example");
    ProbeConfig config;
    config.warmup_count = 0;
    config.group_size = 2;
    config.rate_floor = std::chrono::milliseconds(1);
    ProbePlan plan = make_plan(s, config, {2});
    RequestPlan valid = build_request(s, {}, 1);

    FakeTransport t;
    t.script = [](const RequestPlan& plan, std::size_t) {
        if (plan.payload_class == PayloadClass::Treatment)
            return respond(400, 0.001,
                           R"({"violations": [{"locator": "body:/f", "constraint": "maxLength"}]})");
        return respond(200, 0.001);
    };
    ProbeLog log = execute(plan, valid, t);
    CHECK(log.length_shielded);
}

TEST_CASE("run_campaign: per-host early exit and rollups") {
    std::vector<ApiSurface> surfaces = {
        make_surface("(a|a)*b", "http://alpha.shop.example"),
        make_surface("(x|x)*y", "http://alpha.shop.example"),  // same host, second in line
        make_surface("abc", "http://beta.shop.example"),       // no attack surface
        make_surface("(a|a)*b", "http://beta.shop.example"),
    };
    CampaignOptions opts;
    opts.probe.warmup_count = 1;
    opts.probe.group_size = 2;
    opts.probe.rate_floor = std::chrono::milliseconds(1);
    opts.probe.ladder_targets = {Seconds(0.005)};

    FakeTransport t;
    t.script = [](const RequestPlan& plan, std::size_t) {
        return respond(200, plan.payload_class == PayloadClass::Treatment ? 2.5 : 0.01);
    };
    CampaignReport report = run_campaign(surfaces, opts, t);

    REQUIRE(report.surfaces.size() == 4);
    CHECK(report.surfaces[0].disposition == "probed");
    REQUIRE(report.surfaces[0].verdict.has_value());
    CHECK(report.surfaces[0].verdict->outcome == Outcome::VulnerableConditions1to3);
    CHECK(report.surfaces[1].disposition == "skipped-conclusive");
    CHECK(report.surfaces[2].disposition == "skipped-safe-pattern");
    CHECK(report.surfaces[3].disposition == "probed");

    Json j = report.to_json();
    CHECK(j["by_domain"]["shop.example"]["vulnerable-conditions-1-3"] == 2);
    CHECK(j["by_subdomain"]["alpha.shop.example"]["skipped-conclusive"] == 1);
    CHECK(!j["started_at"].get<std::string>().empty());
}

TEST_CASE("run_campaign: unreachable host is recorded, not fatal") {
    std::vector<ApiSurface> surfaces = {make_surface("(a|a)*b", "http://dead.example")};
    CampaignOptions opts;
    opts.probe.rate_floor = std::chrono::milliseconds(1);
    opts.probe.ladder_targets = {Seconds(0.005)};

    FakeTransport t;
    t.script = [](const RequestPlan&, std::size_t) { return TransportResult{}; };
    CampaignReport report = run_campaign(surfaces, opts, t);
    REQUIRE(report.surfaces.size() == 1);
    CHECK(report.surfaces[0].disposition == "unreachable");
}
