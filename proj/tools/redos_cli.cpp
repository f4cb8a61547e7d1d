// Command-line front end: static analysis, document scanning, calibration,
// probing, the demo target service, and corpus reports. All results go to
// stdout as JSON or JSON-lines; diagnostics go to stderr.
//
// Exit codes: 0 = ran, 1 = usage error, 2 = internal error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "redos/classify.hpp"
#include "redos/prober.hpp"
#include "redos/target_service.hpp"

using namespace redos;

namespace {

using Seconds = std::chrono::duration<double>;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

DocumentFormat format_of(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    return (ext == "yaml" || ext == "yml") ? DocumentFormat::Yaml : DocumentFormat::Json;
}

AnchorMode anchor_of(const std::string& name) {
    if (name == "full_match") return AnchorMode::FullMatch;
    if (name == "unanchored_search") return AnchorMode::UnanchoredSearch;
    throw CLI::ValidationError("--anchor", "expected full_match or unanchored_search");
}

// Shared probing/engine knobs, loadable from a JSON config file; flags set on
// the command line override file values.
struct Config {
    ProbeConfig probe;
    std::string engine = "backtracking";
    std::uint64_t step_budget = kDefaultStepBudget;
    std::uint64_t seed = 1;

    void load(const std::string& path) {
        Json j = Json::parse(slurp(path));
        if (j.contains("deviation_threshold"))
            probe.deviation_threshold = Seconds(j["deviation_threshold"].get<double>());
        if (j.contains("halt_response_time"))
            probe.halt_response_time = Seconds(j["halt_response_time"].get<double>());
        if (j.contains("rate_floor_ms"))
            probe.rate_floor = std::chrono::milliseconds(j["rate_floor_ms"].get<int>());
        if (j.contains("warmup_count")) probe.warmup_count = j["warmup_count"].get<std::size_t>();
        if (j.contains("group_size")) probe.group_size = j["group_size"].get<std::size_t>();
        if (j.contains("max_probe_length"))
            probe.max_probe_length = j["max_probe_length"].get<std::size_t>();
        if (j.contains("ladder")) {
            probe.ladder_targets.clear();
            for (double s : j["ladder"]) probe.ladder_targets.push_back(Seconds(s));
        }
        if (j.contains("engine")) engine = j["engine"].get<std::string>();
        if (j.contains("step_budget")) step_budget = j["step_budget"].get<std::uint64_t>();
        if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    }

    EngineKind engine_kind() const {
        auto k = engine_kind_from_string(engine == "linear" ? "linear" : engine);
        if (!k) throw std::runtime_error("unknown engine: " + engine);
        return *k;
    }
};

Json analyze_one(const std::string& pattern, AnchorMode mode, bool dynamic) {
    StaticReport report = analyze(pattern, mode);
    Json j;
    j["static"] = report.to_json();
    if (dynamic && report.attack) {
        try {
            RegexAst ast = parse(pattern, mode);
            j["dynamic"] = classify_dynamic(*report.attack, ast).to_json();
        } catch (const InconsistentGrowth& e) {
            j["dynamic_error"] = e.what();
        }
    }
    return j;
}

int cmd_analyze(const std::string& pattern, const std::string& corpus_path,
                const std::string& anchor, bool no_dynamic) {
    if (!corpus_path.empty()) {
        for (const CorpusRecord& r : load_corpus(slurp(corpus_path))) {
            Json j = analyze_one(r.pattern, r.anchor_mode, !no_dynamic);
            j["origin"] = r.origin;
            std::cout << j.dump() << "\n";
        }
        return 0;
    }
    std::cout << analyze_one(pattern, anchor_of(anchor), !no_dynamic).dump(2) << "\n";
    return 0;
}

int cmd_scan(const std::vector<std::string>& paths, const std::string& base_url) {
    for (const std::string& path : paths) {
        std::string text = slurp(path);
        bool html = path.size() > 5 && (path.substr(path.size() - 5) == ".html" ||
                                        path.substr(path.size() - 4) == ".htm");
        if (html) {
            for (const FormSurface& s : extract_html_patterns(text, base_url)) {
                Json j = s.to_json();
                j["static"] = analyze(s.pattern, AnchorMode::UnanchoredSearch).to_json();
                std::cout << j.dump() << "\n";
            }
            continue;
        }
        ApiModel model = load_openapi(text, format_of(path), path);
        for (const std::string& w : model.warnings) std::cerr << path << ": " << w << "\n";
        for (const ApiSurface& s : extract_surfaces(model)) {
            Json j = s.to_json();
            j["static"] = analyze(s.pattern, s.anchor_mode).to_json();
            std::cout << j.dump() << "\n";
        }
    }
    return 0;
}

int cmd_calibrate(const std::string& pattern, const std::string& anchor, const Config& config) {
    AnchorMode mode = anchor_of(anchor);
    StaticReport report = analyze(pattern, mode);
    if (!report.attack) {
        std::cerr << "no attack template for this pattern; nothing to calibrate\n";
        Json j;
        j["static"] = report.to_json();
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    RegexAst ast = parse(pattern, mode);
    DynamicClassification cls = classify_dynamic(*report.attack, ast);
    PumpCalibration cal = calibrate_pumps(*report.attack, ast, cls, config.probe.ladder_targets);
    Json j;
    j["classification"] = cls.to_json();
    Json ladder = Json::array();
    for (const auto& e : cal.ladder) {
        ladder.push_back({{"target_s", e.target.count()},
                          {"pump_count", e.pump_count},
                          {"predicted_steps", e.predicted_steps},
                          {"measured_s", e.measured.count()}});
    }
    j["ladder"] = ladder;
    j["over_budget"] = cal.over_budget;
    std::cout << j.dump(2) << "\n";
    return 0;
}

// Scrubs every secret value from the serialized report; secrets must never
// appear in output even when they were injected into requests.
std::string redact(std::string text, const std::vector<std::string>& secrets) {
    for (const std::string& s : secrets) {
        if (s.empty()) continue;
        std::string needle = Json(s).dump();
        needle = needle.substr(1, needle.size() - 2);  // JSON-escaped, unquoted
        for (std::size_t pos = 0; (pos = text.find(needle, pos)) != std::string::npos;)
            text.replace(pos, needle.size(), "[redacted]");
    }
    return text;
}

int cmd_probe(const std::string& surfaces_path, const Config& config,
              const std::vector<std::string>& override_kvs,
              const std::vector<std::string>& secret_kvs) {
    CampaignOptions opts;
    opts.probe = config.probe;
    opts.seed = config.seed;
    std::vector<std::string> secret_values;
    for (bool secret : {false, true}) {
        for (const std::string& kv : secret ? secret_kvs : override_kvs) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--override", "expected locator=value");
            std::string value = kv.substr(eq + 1);
            Json parsed = value;
            try {
                parsed = Json::parse(value);  // numbers/booleans/objects pass through typed
            } catch (const nlohmann::json::parse_error&) {
            }
            opts.overrides[kv.substr(0, eq)] = parsed;
            if (secret) secret_values.push_back(value);
        }
    }

    std::vector<ApiSurface> surfaces;
    std::istringstream in(slurp(surfaces_path));
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        surfaces.push_back(ApiSurface::from_json(Json::parse(line)));
    }
    std::cerr << "probing " << surfaces.size() << " surfaces\n";

    auto transport = make_http_transport();
    CampaignReport report = run_campaign(surfaces, opts, *transport);
    std::cout << redact(report.to_json().dump(2), secret_values) << "\n";
    return 0;
}

std::atomic<bool> g_stop{false};

int cmd_serve(const std::string& spec_path, const Config& config, int port, int workers,
              int base_latency_ms, bool strip_max_length) {
    ServiceConfig service;
    service.model = load_openapi(slurp(spec_path), format_of(spec_path), spec_path);
    service.engine = config.engine_kind();
    service.step_budget = config.step_budget;
    service.port = port;
    service.worker_count = workers;
    service.artificial_base_latency = std::chrono::milliseconds(base_latency_ms);
    service.strip_max_length = strip_max_length;

    TargetService target(service);
    target.start();
    std::cerr << "serving " << spec_path << " on " << target.base_url() << " ("
              << to_string(service.engine) << ")\n";
    std::signal(SIGINT, [](int) { g_stop = true; });
    std::signal(SIGTERM, [](int) { g_stop = true; });
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    target.stop();
    std::cerr << "stopped\n";
    return 0;
}

int cmd_report(const std::string& corpus_path) {
    Json rows = Json::array();
    std::map<std::string, int> by_kind;
    int agreements = 0, conclusive = 0;
    for (const CorpusRecord& r : load_corpus(slurp(corpus_path))) {
        StaticReport report = analyze(r.pattern, r.anchor_mode);
        Json row;
        row["pattern"] = r.pattern;
        row["origin"] = r.origin;
        row["kind"] = report.kind;
        ++by_kind[report.kind];
        if (report.attack) {
            try {
                RegexAst ast = parse(r.pattern, r.anchor_mode);
                DynamicClassification cls = classify_dynamic(*report.attack, ast);
                row["dynamic"] = to_string(cls.cls);
                ++conclusive;
                bool agree = (report.kind == "exponential") ==
                                 (cls.cls == DynamicClassification::Class::Exponential) &&
                             (report.kind == "polynomial") ==
                                 (cls.cls == DynamicClassification::Class::Polynomial);
                row["agreement"] = agree;
                if (agree) ++agreements;
            } catch (const InconsistentGrowth& e) {
                row["dynamic_error"] = e.what();
            }
        }
        rows.push_back(row);
    }
    Json j;
    j["records"] = rows;
    Json counts = Json::object();
    for (const auto& [k, n] : by_kind) counts[k] = n;
    j["by_kind"] = counts;
    j["dynamic_conclusive"] = conclusive;
    j["dynamic_agreements"] = agreements;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-box scanner for regex-based denial-of-service exposure"};
    app.require_subcommand(1);
    app.fallthrough();  // shared flags may follow the subcommand name

    Config config;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");

    // Flag overrides shared by probing commands.
    double flag_threshold = -1, flag_halt = -1;
    int flag_rate_floor = -1;
    std::vector<double> flag_ladder;
    std::string flag_engine;
    std::uint64_t flag_budget = 0, flag_seed = 0;
    app.add_option("--deviation-threshold", flag_threshold, "verdict threshold, seconds");
    app.add_option("--halt-response-time", flag_halt, "halt ceiling, seconds");
    app.add_option("--rate-floor-ms", flag_rate_floor, "minimum gap between requests");
    app.add_option("--ladder", flag_ladder, "calibration targets, seconds");
    app.add_option("--engine", flag_engine, "backtracking | linear");
    app.add_option("--step-budget", flag_budget, "engine step budget");
    app.add_option("--seed", flag_seed, "generation seed");

    auto* analyze_cmd = app.add_subcommand("analyze", "static + dynamic analysis of a pattern");
    std::string pattern, corpus_path, anchor = "unanchored_search";
    bool no_dynamic = false;
    analyze_cmd->add_option("pattern", pattern, "regex to analyze");
    analyze_cmd->add_option("--corpus", corpus_path, "corpus file; one JSON line per record");
    analyze_cmd->add_option("--anchor", anchor, "full_match | unanchored_search");
    analyze_cmd->add_flag("--static-only", no_dynamic, "skip dynamic classification");

    auto* scan_cmd = app.add_subcommand("scan", "extract probe surfaces from documents");
    std::vector<std::string> scan_paths;
    std::string base_url = "http://localhost/";
    scan_cmd->add_option("paths", scan_paths, "API documents (.json/.yaml) or pages (.html)")
        ->required();
    scan_cmd->add_option("--base-url", base_url, "page URL for resolving form actions");

    auto* cal_cmd = app.add_subcommand("calibrate", "pump counts for the target ladder");
    std::string cal_pattern, cal_anchor = "unanchored_search";
    cal_cmd->add_option("pattern", cal_pattern, "regex to calibrate")->required();
    cal_cmd->add_option("--anchor", cal_anchor, "full_match | unanchored_search");

    auto* probe_cmd = app.add_subcommand("probe", "run a probing campaign");
    std::string surfaces_path;
    std::vector<std::string> override_kvs, secret_kvs;
    probe_cmd->add_option("surfaces", surfaces_path, "JSON-lines surface file from `scan`")
        ->required();
    probe_cmd->add_option("--override", override_kvs, "locator=value field override");
    probe_cmd->add_option("--secret", secret_kvs,
                          "locator=value override redacted from all output");

    auto* serve_cmd = app.add_subcommand("serve-target", "run the demo target service");
    std::string serve_spec;
    int serve_port = 0, serve_workers = 1, serve_latency = 0;
    bool serve_strip = false;
    serve_cmd->add_option("spec", serve_spec, "API document to validate against")->required();
    serve_cmd->add_option("--port", serve_port, "port (0 = any free port)");
    serve_cmd->add_option("--workers", serve_workers, "handler thread count");
    serve_cmd->add_option("--base-latency-ms", serve_latency, "artificial response latency");
    serve_cmd->add_flag("--strip-max-length", serve_strip, "drop maxLength constraints");

    auto* report_cmd = app.add_subcommand("report", "corpus-wide agreement report");
    std::string report_corpus;
    report_cmd->add_option("corpus", report_corpus, "corpus file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) config.load(config_path);
        if (flag_threshold >= 0) config.probe.deviation_threshold = Seconds(flag_threshold);
        if (flag_halt >= 0) config.probe.halt_response_time = Seconds(flag_halt);
        if (flag_rate_floor >= 0) config.probe.rate_floor = std::chrono::milliseconds(flag_rate_floor);
        if (!flag_ladder.empty()) {
            config.probe.ladder_targets.clear();
            for (double s : flag_ladder) config.probe.ladder_targets.push_back(Seconds(s));
        }
        if (!flag_engine.empty()) config.engine = flag_engine;
        if (flag_budget > 0) config.step_budget = flag_budget;
        if (flag_seed > 0) config.seed = flag_seed;

        if (analyze_cmd->parsed()) {
            if (pattern.empty() && corpus_path.empty()) {
                std::cerr << "analyze: give a pattern or --corpus\n";
                return 1;
            }
            return cmd_analyze(pattern, corpus_path, anchor, no_dynamic);
        }
        if (scan_cmd->parsed()) return cmd_scan(scan_paths, base_url);
        if (cal_cmd->parsed()) return cmd_calibrate(cal_pattern, cal_anchor, config);
        if (probe_cmd->parsed()) return cmd_probe(surfaces_path, config, override_kvs, secret_kvs);
        if (serve_cmd->parsed())
            return cmd_serve(serve_spec, config, serve_port, serve_workers, serve_latency,
                             serve_strip);
        if (report_cmd->parsed()) return cmd_report(report_corpus);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
