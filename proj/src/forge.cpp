#include "redos/forge.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "redos/sampler.hpp"

namespace redos {

namespace {

Json* find_field(Json& body, const std::string& pointer) {
    Json* cur = &body;
    std::size_t pos = 0;
    while (pos < pointer.size()) {
        if (pointer[pos] != '/') return nullptr;
        std::size_t end = pointer.find('/', pos + 1);
        std::string token = pointer.substr(pos + 1, end == std::string::npos ? std::string::npos
                                                                             : end - pos - 1);
        if (cur->is_object()) {
            if (!cur->contains(token)) return nullptr;
            cur = &(*cur)[token];
        } else if (cur->is_array()) {
            std::size_t idx = std::stoul(token);
            if (idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        } else {
            return nullptr;
        }
        pos = end == std::string::npos ? pointer.size() : end;
    }
    return cur;
}

std::string generate_string(const Json& schema, std::mt19937_64& rng) {
    std::size_t min_len = schema.value("minLength", std::size_t(0));
    std::size_t max_len = schema.value("maxLength", std::size_t(64));
    if (max_len < min_len) throw UnsatisfiableSchema("minLength exceeds maxLength");

    if (schema.contains("pattern")) {
        std::string pattern = schema["pattern"].get<std::string>();
        Nfa nfa;
        try {
            nfa = compile_nfa(parse(pattern, AnchorMode::UnanchoredSearch));
        } catch (const std::exception& e) {
            throw UnsatisfiableSchema(std::string("pattern unanalyzable: ") + e.what());
        }
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::string s;
            try {
                s = sample_member(nfa, max_len, rng());
            } catch (const NoWitnessWithinLength&) {
                throw UnsatisfiableSchema("pattern has no member within maxLength");
            }
            if (utf8_decode(s).size() >= min_len) return s;
        }
        throw UnsatisfiableSchema("pattern members fall below minLength");
    }

    std::size_t len = min_len + (min_len < max_len ? rng() % (max_len - min_len + 1) : 0);
    len = std::min(len, std::max<std::size_t>(min_len, 8));
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += char('a' + rng() % 26);
    return s;
}

Json generate(const Json& schema, std::mt19937_64& rng) {
    if (!schema.is_object()) return Json::object();
    if (schema.contains("enum") && schema["enum"].is_array() && !schema["enum"].empty())
        return schema["enum"][rng() % schema["enum"].size()];

    std::string type = schema.value("type", schema.contains("properties") ? "object" : "string");
    if (type == "string") return generate_string(schema, rng);
    if (type == "integer" || type == "number") {
        double lo = schema.value("minimum", 0.0);
        double hi = schema.value("maximum", lo + 100.0);
        if (hi < lo) throw UnsatisfiableSchema("minimum exceeds maximum");
        if (type == "integer") {
            long long ilo = (long long)std::ceil(lo), ihi = (long long)std::floor(hi);
            if (ihi < ilo) throw UnsatisfiableSchema("no integer between minimum and maximum");
            return ilo + (long long)(rng() % std::uint64_t(ihi - ilo + 1));
        }
        return lo;
    }
    if (type == "boolean") return true;
    if (type == "array") {
        Json a = Json::array();
        if (schema.contains("items")) a.push_back(generate(schema["items"], rng));
        return a;
    }
    if (type == "null") return nullptr;

    Json o = Json::object();
    if (schema.contains("properties") && schema["properties"].is_object())
        for (const auto& [k, sub] : schema["properties"].items()) o[k] = generate(sub, rng);
    return o;
}

std::string json_as_string(const Json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

void set_field(RequestPlan& plan, const ApiSurface& surface, const std::string& value) {
    const FieldLocator& loc = surface.field_locator;
    switch (loc.kind) {
        case FieldLocator::Kind::Body: {
            Json* slot = find_field(plan.body, loc.name);
            if (!slot) throw FieldNotFound(loc.to_string());
            *slot = value;
            return;
        }
        case FieldLocator::Kind::Query:
            for (auto& [k, v] : plan.query)
                if (k == loc.name) {
                    v = value;
                    return;
                }
            plan.query.emplace_back(loc.name, value);
            return;
        case FieldLocator::Kind::Header:
            for (auto& [k, v] : plan.headers)
                if (k == loc.name) {
                    v = value;
                    return;
                }
            plan.headers.emplace_back(loc.name, value);
            return;
        case FieldLocator::Kind::Path: {
            auto it = plan.path_values.find(loc.name);
            if (it == plan.path_values.end()) throw FieldNotFound(loc.to_string());
            it->second = value;
            // Re-substitute the URL below via rebuild in caller.
            return;
        }
    }
}

std::string substitute_path(const std::string& server, const std::string& path_template,
                            const std::map<std::string, std::string>& values) {
    std::string path = path_template;
    for (const auto& [name, value] : values) {
        std::string needle = "{" + name + "}";
        for (std::size_t at = path.find(needle); at != std::string::npos;
             at = path.find(needle, at))
            path.replace(at, needle.size(), value);
    }
    std::string base = server;
    while (!base.empty() && base.back() == '/') base.pop_back();
    return base + path;
}

}  // namespace

std::string RequestPlan::injected_value() const {
    if (!injected_field) return {};
    switch (injected_field->kind) {
        case FieldLocator::Kind::Body: {
            Json b = body;
            Json* slot = find_field(b, injected_field->name);
            return slot && slot->is_string() ? slot->get<std::string>() : std::string{};
        }
        case FieldLocator::Kind::Query:
            for (const auto& [k, v] : query)
                if (k == injected_field->name) return v;
            return {};
        case FieldLocator::Kind::Header:
            for (const auto& [k, v] : headers)
                if (k == injected_field->name) return v;
            return {};
        case FieldLocator::Kind::Path: {
            auto it = path_values.find(injected_field->name);
            return it == path_values.end() ? std::string{} : it->second;
        }
    }
    return {};
}

Json RequestPlan::to_json() const {
    Json j;
    j["method"] = method;
    j["url"] = url;
    Json h = Json::array(), q = Json::array();
    for (const auto& [k, v] : headers) h.push_back({{"name", k}, {"value", v}});
    for (const auto& [k, v] : query) q.push_back({{"name", k}, {"value", v}});
    j["headers"] = h;
    j["query"] = q;
    j["body"] = body;
    j["payload_class"] = payload_class == PayloadClass::Valid     ? "valid"
                         : payload_class == PayloadClass::Control ? "control"
                                                                  : "treatment";
    if (injected_field) j["injected_field"] = injected_field->to_string();
    j["pumps"] = pumps;
    j["injected_length"] = injected_length;
    return j;
}

Json generate_valid_value(const Json& schema, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return generate(schema, rng);
}

RequestPlan build_request(const ApiSurface& surface, const Overrides& overrides,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RequestPlan plan;
    plan.method = surface.method;
    plan.path_template = surface.path_template;

    for (const auto& p : surface.parameters) {
        if (!p.is_object()) continue;
        std::string name = p.value("name", "");
        std::string in = p.value("in", "query");
        bool required = p.value("required", false) || in == "path";
        FieldLocator loc;
        loc.kind = in == "path"     ? FieldLocator::Kind::Path
                   : in == "header" ? FieldLocator::Kind::Header
                                    : FieldLocator::Kind::Query;
        loc.name = name;
        std::string key = loc.to_string();

        std::string value;
        if (auto it = overrides.find(key); it != overrides.end()) {
            value = json_as_string(it->second);
        } else if (in == "path") {
            // Path parameters identify resources; the target field under
            // test is the only one this artifact dares to synthesize.
            if (surface.field_locator == loc && p.contains("schema"))
                value = json_as_string(generate(p["schema"], rng));
            else
                throw MissingOverride(key);
        } else if (required) {
            value = json_as_string(generate(p.contains("schema") ? p["schema"] : Json::object(),
                                            rng));
        } else {
            continue;
        }
        switch (loc.kind) {
            case FieldLocator::Kind::Path: plan.path_values[name] = value; break;
            case FieldLocator::Kind::Header: plan.headers.emplace_back(name, value); break;
            default: plan.query.emplace_back(name, value); break;
        }
    }

    // Placeholders not declared as parameters still need values.
    for (std::size_t at = surface.path_template.find('{'); at != std::string::npos;
         at = surface.path_template.find('{', at + 1)) {
        std::size_t end = surface.path_template.find('}', at);
        if (end == std::string::npos) break;
        std::string name = surface.path_template.substr(at + 1, end - at - 1);
        if (plan.path_values.count(name)) continue;
        std::string key = "path:" + name;
        auto it = overrides.find(key);
        if (it == overrides.end()) throw MissingOverride(key);
        plan.path_values[name] = json_as_string(it->second);
    }

    if (surface.body_schema.is_object()) {
        plan.body = generate(surface.body_schema, rng);
        for (const auto& [loc_str, _] : surface.sibling_constraints) {
            if (auto it = overrides.find(loc_str); it != overrides.end()) {
                FieldLocator loc = FieldLocator::from_string(loc_str);
                if (loc.kind == FieldLocator::Kind::Body) {
                    if (Json* slot = find_field(plan.body, loc.name)) *slot = it->second;
                }
            }
        }
    }

    plan.url = substitute_path(surface.server_url, surface.path_template, plan.path_values);
    plan.payload_class = PayloadClass::Valid;
    return plan;
}

RequestPlan inject_probe(const RequestPlan& plan, const ApiSurface& surface,
                         const AttackTemplate& tmpl, std::size_t pumps) {
    if (plan.payload_class != PayloadClass::Valid)
        throw std::invalid_argument("inject_probe requires a Valid plan");
    if (pumps < 1) throw std::invalid_argument("inject_probe requires pumps >= 1");
    RequestPlan out = plan;
    std::string value = tmpl.instantiate(pumps);
    set_field(out, surface, value);
    out.url = substitute_path(surface.server_url, surface.path_template, out.path_values);
    out.injected_field = surface.field_locator;
    out.payload_class = PayloadClass::Treatment;
    out.pumps = pumps;
    out.injected_length = utf8_decode(value).size();
    return out;
}

RequestPlan make_control(const RequestPlan& plan, const ApiSurface& surface, std::size_t length,
                         std::uint64_t seed) {
    if (plan.payload_class != PayloadClass::Valid)
        throw std::invalid_argument("make_control requires a Valid plan");
    CompiledRegex re;
    try {
        re = compile_regex(surface.pattern, surface.anchor_mode);
    } catch (const std::exception& e) {
        throw ControlUnavailable(e.what());
    }

    std::mt19937_64 rng(seed);
    Codepoint dead = 0;
    bool have_dead = dead_codepoint(re.nfa, dead);
    std::vector<Codepoint> alpha = alphabet_representatives(re.nfa);
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::u32string s;
        if (attempt == 0 && have_dead) {
            s.assign(length, dead);  // rejected on the first symbol
        } else {
            for (std::size_t i = 0; i < length; ++i) {
                if (have_dead && rng() % 2 == 0)
                    s.push_back(dead);
                else
                    s.push_back(alpha[rng() % alpha.size()]);
            }
        }
        MatchOutcome lin = linear_match(re, s);
        if (lin.matched) continue;
        // The backtracking engine must also reject this cheaply; a random
        // rejecting string can still trigger super-linear exploration.
        BacktrackLimits lim;
        lim.step_budget = 64 * (std::uint64_t(s.size()) + 1) * (re.program.size() + 1);
        MatchOutcome bt = backtrack_match(re, s, lim);
        if (bt.budget_exhausted || bt.matched) continue;

        RequestPlan out = plan;
        std::string value = utf8_encode(s);
        set_field(out, surface, value);
        out.url = substitute_path(surface.server_url, surface.path_template, out.path_values);
        out.injected_field = surface.field_locator;
        out.payload_class = PayloadClass::Control;
        out.injected_length = length;
        return out;
    }
    throw ControlUnavailable("no rejecting string of length " + std::to_string(length) +
                             " found within the retry budget");
}

namespace {

LocalValidation validate_plan(const Json& body_schema, const Json& parameters,
                              const RequestPlan& plan, const EngineFactory& engines) {
    LocalValidation v;
    for (const auto& p : parameters) {
        if (!p.is_object()) continue;
        std::string name = p.value("name", "");
        std::string in = p.value("in", "query");
        FieldLocator loc;
        loc.kind = in == "path"     ? FieldLocator::Kind::Path
                   : in == "header" ? FieldLocator::Kind::Header
                                    : FieldLocator::Kind::Query;
        loc.name = name;
        std::string value;
        bool present = false;
        if (loc.kind == FieldLocator::Kind::Path) {
            auto it = plan.path_values.find(name);
            present = it != plan.path_values.end();
            if (present) value = it->second;
        } else {
            const auto& list = loc.kind == FieldLocator::Kind::Header ? plan.headers : plan.query;
            for (const auto& [k, val] : list)
                if (k == name) {
                    present = true;
                    value = val;
                }
        }
        if (!present) {
            if (p.value("required", false) || in == "path")
                v.outcome.violations.push_back({loc.to_string(), "required",
                                                "missing required parameter"});
            continue;
        }
        if (p.contains("schema")) {
            // Parameters arrive as text; coerce to the declared type first.
            Json typed = value;
            std::string want = p["schema"].value("type", "string");
            if (want == "integer" || want == "number" || want == "boolean") {
                try {
                    typed = Json::parse(value);
                } catch (const nlohmann::json::parse_error&) {
                }
            }
            ValidationOutcome o = validate_value(p["schema"], typed, loc.to_string(), engines);
            v.outcome.budget_exhausted |= o.budget_exhausted;
            for (auto& viol : o.violations) v.outcome.violations.push_back(std::move(viol));
        }
    }
    if (body_schema.is_object()) {
        ValidationOutcome o = validate_value(body_schema, plan.body, "body:", engines);
        v.outcome.budget_exhausted |= o.budget_exhausted;
        for (auto& viol : o.violations) v.outcome.violations.push_back(std::move(viol));
    }
    return v;
}

}  // namespace

LocalValidation validate_local(const ApiSurface& surface, const RequestPlan& plan,
                               const EngineFactory& engines) {
    return validate_plan(surface.body_schema, surface.parameters, plan, engines);
}

LocalValidation validate_local(const ApiModel& model, const RequestPlan& plan,
                               const EngineFactory& engines) {
    // Locate the operation by method + path template.
    if (model.doc.contains("paths")) {
        for (const auto& [path, item] : model.doc["paths"].items()) {
            if (path != plan.path_template) continue;
            for (const char* verb : {"get", "put", "post", "delete", "patch", "head", "options"}) {
                if (!item.contains(verb)) continue;
                std::string upper = verb;
                std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
                if (upper != plan.method) continue;
                const Json& op = item[verb];
                Json params = item.contains("parameters") ? item["parameters"] : Json::array();
                if (op.contains("parameters"))
                    for (const auto& p : op["parameters"]) params.push_back(p);
                Json body_schema;
                if (op.contains("requestBody") && op["requestBody"].contains("content") &&
                    op["requestBody"]["content"].contains("application/json"))
                    body_schema = op["requestBody"]["content"]["application/json"]
                                      .value("schema", Json());
                return validate_plan(body_schema, params, plan, engines);
            }
        }
    }
    LocalValidation v;
    v.outcome.violations.push_back({plan.method + " " + plan.path_template, "operation",
                                    "operation not found in the document"});
    return v;
}

}  // namespace redos
