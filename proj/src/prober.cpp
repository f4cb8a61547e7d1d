#include "redos/prober.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <map>
#include <thread>

#include <httplib.h>

namespace redos {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(std::chrono::duration<double> d) { return d.count(); }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

std::vector<double> rtts_of(const std::vector<ProbeEntry>& entries) {
    std::vector<double> out;
    for (const auto& e : entries)
        if (e.ok) out.push_back(seconds(e.rtt));
    return out;
}

// Splits an absolute URL into (scheme://host[:port], path+query).
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return {url, "/"};
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string host_of(const std::string& url) {
    auto [origin, _] = split_url(url);
    auto scheme_end = origin.find("://");
    return scheme_end == std::string::npos ? origin : origin.substr(scheme_end + 3);
}

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += char(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

class HttpTransport : public Transport {
public:
    TransportResult send(const RequestPlan& plan) override {
        auto [origin, path] = split_url(plan.url);
        TransportResult r;
        Clock::time_point start = Clock::now();
        httplib::Client client(origin);
        client.set_keep_alive(false);
        client.set_read_timeout(30, 0);
        httplib::Headers headers;
        for (const auto& [k, v] : plan.headers) headers.emplace(k, v);
        std::string target = path;
        if (!plan.query.empty()) {
            target += '?';
            bool first = true;
            for (const auto& [k, v] : plan.query) {
                if (!first) target += '&';
                first = false;
                target += url_encode(k) + "=" + url_encode(v);
            }
        }
        httplib::Result res;
        if (plan.method == "GET") {
            res = client.Get(target, headers);
        } else if (plan.method == "DELETE") {
            res = client.Delete(target, headers);
        } else {
            std::string body = plan.body.is_null() ? "" : plan.body.dump();
            if (plan.method == "PUT")
                res = client.Put(target, headers, body, "application/json");
            else if (plan.method == "PATCH")
                res = client.Patch(target, headers, body, "application/json");
            else
                res = client.Post(target, headers, body, "application/json");
        }
        r.rtt = Clock::now() - start;
        if (res) {
            r.ok = true;
            r.status = res->status;
            r.body = res->body;
        } else {
            r.error = httplib::to_string(res.error());
        }
        return r;
    }
};

Json violations_of(const std::string& body) {
    try {
        Json j = Json::parse(body);
        if (j.is_object() && j.contains("violations")) return j["violations"];
    } catch (const nlohmann::json::parse_error&) {
    }
    return Json();
}

// True when a 400-response violation list names only length constraints on
// the injected field; the pattern was never reached.
bool only_length_violations(const Json& violations) {
    if (!violations.is_array() || violations.empty()) return false;
    for (const auto& v : violations) {
        std::string c = v.is_object() ? v.value("constraint", "") : "";
        if (c != "maxLength" && c != "minLength") return false;
    }
    return true;
}

struct Pacer {
    std::chrono::milliseconds floor;
    std::optional<Clock::time_point> last_send;

    void wait() {
        if (last_send) {
            auto due = *last_send + floor;
            auto now = Clock::now();
            if (now < due) std::this_thread::sleep_for(due - now);
        }
    }
};

ProbeEntry send_one(Transport& transport, const RequestPlan& plan, Pacer& pacer, ProbeLog& log) {
    pacer.wait();
    ProbeEntry e;
    e.pumps = plan.pumps;
    e.length = plan.injected_length;
    e.sent_at = Clock::now();
    pacer.last_send = e.sent_at;
    log.send_times.push_back(e.sent_at);
    TransportResult r = transport.send(plan);
    e.ok = r.ok;
    e.status = r.status;
    e.rtt = r.rtt;
    e.error = r.error;
    if (r.ok && r.status == 400) e.violations = violations_of(r.body);
    return e;
}

bool halts(const ProbeEntry& e, const ProbePlan& plan, ProbeLog& log) {
    if (e.ok && e.status >= 500) {
        log.halt_reason = HaltReason::ServerError;
        return true;
    }
    if (e.ok && e.rtt > plan.config.halt_response_time) {
        log.halt_reason = HaltReason::OverlongResponse;
        return true;
    }
    return false;
}

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::VulnerableConditions1to3: return "vulnerable-conditions-1-3";
        case Outcome::SafeEngine: return "safe-engine";
        case Outcome::Inconclusive: return "inconclusive";
        case Outcome::HaltedUnsafe: return "halted-unsafe";
    }
    return "inconclusive";
}

std::string to_string(HaltReason r) {
    switch (r) {
        case HaltReason::None: return "none";
        case HaltReason::ServerError: return "server_error";
        case HaltReason::OverlongResponse: return "overlong_response";
    }
    return "none";
}

Json Verdict::to_json() const {
    Json j;
    j["outcome"] = redos::to_string(outcome);
    j["step_deviations"] = step_deviations;
    j["baseline_valid"] = baseline_valid;
    j["caching_flag"] = caching_flag;
    j["manual_follow_up"] = manual_follow_up;
    return j;
}

ProbePlan plan_probe(const ApiSurface& surface, const AttackTemplate& tmpl,
                     const DynamicClassification& cls, const PumpCalibration& calibration,
                     const ProbeConfig& config) {
    if (!cls.super_linear())
        throw std::invalid_argument("plan_probe requires a super-linear classification");
    ProbePlan plan;
    plan.surface = surface;
    plan.tmpl = tmpl;
    plan.config = config;
    for (const auto& entry : calibration.ladder) {
        std::size_t length = utf8_decode(tmpl.instantiate(entry.pump_count)).size();
        if (length > config.max_probe_length) {
            plan.warnings.push_back("dropped ladder step at " +
                                    std::to_string(entry.target.count()) +
                                    "s: probe length " + std::to_string(length) +
                                    " exceeds max_probe_length");
            continue;
        }
        plan.ladder.push_back(entry);
    }
    if (plan.ladder.empty()) throw EmptyLadder();
    return plan;
}

void establish_baseline(const ProbePlan& plan, const RequestPlan& valid, Transport& transport,
                        ProbeLog& log) {
    Pacer pacer{plan.config.rate_floor, {}};
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(plan.config.baseline_retries, 1);
         ++attempt) {
        ProbeEntry e = send_one(transport, valid, pacer, log);
        log.baseline_attempts.push_back(e);
        if (e.ok && e.status >= 200 && e.status < 300) {
            log.baseline_valid = true;
            return;
        }
        if (e.ok) return;  // a live non-2XX answer: proceed with the invalid baseline
    }
    log.unreachable = true;
}

ProbeLog execute(const ProbePlan& plan, const RequestPlan& valid, Transport& transport) {
    ProbeLog log;
    establish_baseline(plan, valid, transport, log);
    if (log.unreachable) return log;

    Pacer pacer{plan.config.rate_floor, log.send_times.empty() ? std::optional<Clock::time_point>{}
                                                               : log.send_times.back()};
    for (std::size_t i = 0; i < plan.config.warmup_count; ++i) {
        ProbeEntry e = send_one(transport, valid, pacer, log);
        log.warmups.push_back(e);
        if (halts(e, plan, log)) return log;
    }

    bool any_treatment = false, all_length_shielded = true;
    for (const auto& entry : plan.ladder) {
        StepLog step;
        step.pumps = entry.pump_count;
        RequestPlan treatment = inject_probe(valid, plan.surface, plan.tmpl, entry.pump_count);
        step.length = treatment.injected_length;
        RequestPlan control =
            make_control(valid, plan.surface, treatment.injected_length,
                         0x9e3779b97f4a7c15ULL ^ entry.pump_count);

        // Interleave C,T,C,T,... to decorrelate drift.
        for (std::size_t i = 0; i < plan.config.group_size; ++i) {
            ProbeEntry c = send_one(transport, control, pacer, log);
            step.control.push_back(c);
            if (halts(c, plan, log)) {
                log.steps.push_back(std::move(step));
                return log;
            }
            ProbeEntry t = send_one(transport, treatment, pacer, log);
            any_treatment = true;
            if (!(t.ok && t.status == 400 && only_length_violations(t.violations)))
                all_length_shielded = false;
            step.treatment.push_back(t);
            if (halts(t, plan, log)) {
                log.steps.push_back(std::move(step));
                return log;
            }
        }
        log.steps.push_back(std::move(step));
    }
    log.length_shielded = any_treatment && all_length_shielded;
    return log;
}

Verdict decide(const ProbeLog& log, const Thresholds& thresholds) {
    Verdict v;
    v.baseline_valid = log.baseline_valid;
    const double threshold = seconds(thresholds.deviation_threshold);

    for (const auto& step : log.steps) {
        double dev = median(rtts_of(step.treatment)) - median(rtts_of(step.control));
        v.step_deviations.push_back(dev);
        // Caching defenses show as a slow first treatment followed by fast
        // repeats of the identical probe.
        std::vector<double> t = rtts_of(step.treatment);
        if (t.size() >= 2) {
            double rest = median(std::vector<double>(t.begin() + 1, t.end()));
            if (t.front() - rest >= threshold) v.caching_flag = true;
        }
    }

    if (log.halt_reason != HaltReason::None) {
        v.outcome = Outcome::HaltedUnsafe;
        return v;
    }
    bool deviant = std::any_of(v.step_deviations.begin(), v.step_deviations.end(),
                               [&](double d) { return d >= threshold; });
    if (deviant) {
        v.outcome = Outcome::VulnerableConditions1to3;
        return v;
    }
    v.manual_follow_up = std::any_of(v.step_deviations.begin(), v.step_deviations.end(),
                                     [&](double d) { return d > 0.0 && d < threshold; });
    v.outcome = log.baseline_valid ? Outcome::SafeEngine : Outcome::Inconclusive;
    return v;
}

Json SurfaceResult::to_json() const {
    Json j;
    j["surface"] = surface.to_json();
    j["static"] = static_report.to_json();
    if (classification) j["dynamic"] = classification->to_json();
    if (verdict) j["verdict"] = verdict->to_json();
    j["disposition"] = disposition;
    j["step_deviations"] = step_deviations;
    j["halt_reason"] = halt_reason;
    j["caching_flag"] = caching_flag;
    return j;
}

std::string rfc3339_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json CampaignReport::to_json() const {
    Json j;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    Json list = Json::array();
    std::map<std::string, std::map<std::string, int>> by_domain;     // domain -> outcome -> n
    std::map<std::string, std::map<std::string, int>> by_subdomain;  // host -> outcome -> n
    for (const auto& s : surfaces) {
        list.push_back(s.to_json());
        std::string host = host_of(s.surface.server_url);
        auto colon = host.find(':');
        if (colon != std::string::npos) host = host.substr(0, colon);
        // Registrable domain approximated as the last two labels.
        std::string domain = host;
        auto last = host.rfind('.');
        if (last != std::string::npos) {
            auto prev = host.rfind('.', last - 1);
            if (prev != std::string::npos) domain = host.substr(prev + 1);
        }
        std::string key = s.verdict ? redos::to_string(s.verdict->outcome) : s.disposition;
        ++by_domain[domain][key];
        ++by_subdomain[host][key];
    }
    j["surfaces"] = list;
    Json dom = Json::object(), sub = Json::object();
    for (const auto& [d, counts] : by_domain) {
        Json c = Json::object();
        for (const auto& [k, n] : counts) c[k] = n;
        dom[d] = c;
    }
    for (const auto& [h, counts] : by_subdomain) {
        Json c = Json::object();
        for (const auto& [k, n] : counts) c[k] = n;
        sub[h] = c;
    }
    j["by_domain"] = dom;
    j["by_subdomain"] = sub;
    return j;
}

CampaignReport run_campaign(const std::vector<ApiSurface>& surfaces, const CampaignOptions& opts,
                            Transport& transport) {
    CampaignReport report;
    report.started_at = rfc3339_now();

    // Group by host, preserving order within each group.
    std::vector<std::string> host_order;
    std::map<std::string, std::vector<const ApiSurface*>> by_host;
    for (const auto& s : surfaces) {
        std::string host = host_of(s.server_url);
        if (!by_host.count(host)) host_order.push_back(host);
        by_host[host].push_back(&s);
    }

    for (const std::string& host : host_order) {
        bool conclusive = false;
        for (const ApiSurface* sp : by_host[host]) {
            const ApiSurface& surface = *sp;
            SurfaceResult result;
            result.surface = surface;
            result.static_report = analyze(surface.pattern, surface.anchor_mode);

            if (conclusive) {
                result.disposition = "skipped-conclusive";
                report.surfaces.push_back(std::move(result));
                continue;
            }
            if (!result.static_report.attack) {
                result.disposition = "skipped-safe-pattern";
                report.surfaces.push_back(std::move(result));
                continue;
            }

            try {
                RegexAst ast = parse(surface.pattern, surface.anchor_mode);
                DynamicClassification cls =
                    classify_dynamic(*result.static_report.attack, ast);
                result.classification = cls;
                if (!cls.super_linear()) {
                    result.disposition = "skipped-safe-pattern";
                    report.surfaces.push_back(std::move(result));
                    continue;
                }
                PumpCalibration calibration = calibrate_pumps(
                    *result.static_report.attack, ast, cls, opts.probe.ladder_targets);
                ProbePlan plan = plan_probe(surface, *result.static_report.attack, cls,
                                            calibration, opts.probe);
                RequestPlan valid = build_request(surface, opts.overrides, opts.seed);
                ProbeLog log = execute(plan, valid, transport);
                if (log.unreachable) {
                    result.disposition = "unreachable";
                    report.surfaces.push_back(std::move(result));
                    continue;
                }
                Verdict verdict = decide(log, Thresholds{opts.probe.deviation_threshold});
                result.verdict = verdict;
                result.step_deviations = verdict.step_deviations;
                result.halt_reason = redos::to_string(log.halt_reason);
                result.caching_flag = verdict.caching_flag;
                result.disposition = log.length_shielded ? "length-shielded" : "probed";
                if (verdict.outcome != Outcome::Inconclusive) conclusive = true;
            } catch (const MissingOverride& e) {
                result.disposition = "needs-override";
            } catch (const UnsatisfiableSchema&) {
                result.disposition = "uncraftable";
            } catch (const ControlUnavailable&) {
                result.disposition = "uncraftable";
            } catch (const InconsistentGrowth&) {
                result.disposition = "inconsistent-growth";
            } catch (const EmptyLadder&) {
                result.disposition = "length-shielded";
            }
            report.surfaces.push_back(std::move(result));
        }
    }
    report.finished_at = rfc3339_now();
    return report;
}

}  // namespace redos
