#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "redos/classify.hpp"
#include "redos/forge.hpp"

namespace redos {

struct EmptyLadder : std::runtime_error {
    EmptyLadder() : std::runtime_error("every ladder step exceeds max_probe_length") {}
};

struct ProbeConfig {
    std::size_t warmup_count = 3;
    std::size_t group_size = 5;
    std::chrono::milliseconds rate_floor{1000};          // min gap between sends
    std::chrono::duration<double> halt_response_time{5.0};
    std::chrono::duration<double> deviation_threshold{1.0};
    std::size_t max_probe_length = 128 * 1024;
    std::size_t baseline_retries = 3;
    std::vector<std::chrono::duration<double>> ladder_targets = default_ladder();
};

struct ProbePlan {
    ApiSurface surface;
    AttackTemplate tmpl;
    std::vector<CalibrationEntry> ladder;  // steps respecting max_probe_length
    ProbeConfig config;
    std::vector<std::string> warnings;     // dropped oversize steps, etc.
};

struct TransportResult {
    bool ok = false;          // a response was received
    int status = 0;
    std::string body;
    std::chrono::duration<double> rtt{0};  // send-start -> last-byte
    std::string error;
};

// One in-flight request at a time per instance; the prober enforces pacing.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResult send(const RequestPlan& plan) = 0;
};

// HTTP/1.1 transport without persistent connections, so each probe measures
// a full exchange.
std::unique_ptr<Transport> make_http_transport();

enum class HaltReason { None, ServerError, OverlongResponse };

struct ProbeEntry {
    std::size_t pumps = 0;   // treatment entries
    std::size_t length = 0;  // injected length (both groups)
    int status = 0;
    bool ok = false;
    std::chrono::duration<double> rtt{0};
    std::chrono::steady_clock::time_point sent_at{};
    std::string error;
    Json violations;  // parsed violation list of a 400 body, if any
};

struct StepLog {
    std::size_t pumps = 0;
    std::size_t length = 0;
    std::vector<ProbeEntry> treatment;
    std::vector<ProbeEntry> control;
};

struct ProbeLog {
    std::vector<ProbeEntry> baseline_attempts;
    bool baseline_valid = false;
    bool unreachable = false;
    std::vector<ProbeEntry> warmups;
    std::vector<StepLog> steps;
    HaltReason halt_reason = HaltReason::None;
    bool length_shielded = false;  // every treatment 400 named only length constraints
    std::vector<std::chrono::steady_clock::time_point> send_times;
};

enum class Outcome { VulnerableConditions1to3, SafeEngine, Inconclusive, HaltedUnsafe };

std::string to_string(Outcome o);
std::string to_string(HaltReason r);

struct Verdict {
    Outcome outcome = Outcome::Inconclusive;
    std::vector<double> step_deviations;  // per-step median(T) - median(C), seconds
    bool baseline_valid = false;
    bool caching_flag = false;
    bool manual_follow_up = false;  // positive but sub-threshold deviation observed

    Json to_json() const;
};

struct Thresholds {
    std::chrono::duration<double> deviation_threshold{1.0};
};

// Stage 1: ladder steps whose probe strings respect max_probe_length.
ProbePlan plan_probe(const ApiSurface& surface, const AttackTemplate& tmpl,
                     const DynamicClassification& cls, const PumpCalibration& calibration,
                     const ProbeConfig& config);

// Stage 2: valid-request baseline. baseline_valid iff any response is 2XX;
// probing proceeds either way unless the host is unreachable.
void establish_baseline(const ProbePlan& plan, const RequestPlan& valid, Transport& transport,
                        ProbeLog& log);

// Stages 3-5: warmups, then per ladder step interleaved control/treatment
// groups, a rate floor between sends, and an immediate halt on any 5XX or
// overlong response.
ProbeLog execute(const ProbePlan& plan, const RequestPlan& valid, Transport& transport);

// Pure decision tree over a complete or halted log.
Verdict decide(const ProbeLog& log, const Thresholds& thresholds);

struct SurfaceResult {
    ApiSurface surface;
    StaticReport static_report;
    std::optional<DynamicClassification> classification;
    std::optional<Verdict> verdict;
    std::string disposition;  // probed | skipped-conclusive | skipped-safe-pattern |
                              // uncraftable | unreachable | length-shielded
    std::vector<double> step_deviations;
    std::string halt_reason;
    bool caching_flag = false;

    Json to_json() const;
};

struct CampaignReport {
    std::vector<SurfaceResult> surfaces;
    std::string started_at;   // RFC 3339
    std::string finished_at;

    Json to_json() const;  // includes per-domain and per-subdomain rollups
};

struct CampaignOptions {
    ProbeConfig probe;
    Overrides overrides;
    std::uint64_t seed = 1;
};

// Probes surfaces grouped by host; within a host, stops at the first
// conclusive verdict and marks the remaining surfaces skipped-conclusive.
CampaignReport run_campaign(const std::vector<ApiSurface>& surfaces, const CampaignOptions& opts,
                            Transport& transport);

std::string rfc3339_now();

}  // namespace redos
