#include "redos/openapi.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <yaml-cpp/yaml.h>

namespace redos {

namespace {

Json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            // YAML scalars are untyped; probe the common JSON types.
            const std::string& s = n.Scalar();
            if (n.Tag() != "!") {  // not explicitly quoted
                if (s == "true") return true;
                if (s == "false") return false;
                if (s == "null" || s == "~") return nullptr;
                try {
                    std::size_t used = 0;
                    if (s.find_first_of(".eE") == std::string::npos) {
                        long long v = std::stoll(s, &used);
                        if (used == s.size()) return v;
                    } else {
                        double v = std::stod(s, &used);
                        if (used == s.size()) return v;
                    }
                } catch (const std::exception&) {
                }
            }
            return s;
        }
        case YAML::NodeType::Sequence: {
            Json a = Json::array();
            for (const auto& item : n) a.push_back(yaml_to_json(item));
            return a;
        }
        case YAML::NodeType::Map: {
            Json o = Json::object();
            for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
        default:
            return nullptr;
    }
}

const Json* lookup_pointer(const Json& doc, const std::string& ref) {
    if (ref.empty() || ref[0] != '#') return nullptr;
    const Json* cur = &doc;
    std::size_t pos = 1;
    while (pos < ref.size()) {
        if (ref[pos] != '/') return nullptr;
        std::size_t end = ref.find('/', pos + 1);
        std::string token = ref.substr(pos + 1, end == std::string::npos ? std::string::npos
                                                                         : end - pos - 1);
        // RFC 6901 escapes.
        std::string t;
        for (std::size_t i = 0; i < token.size(); ++i) {
            if (token[i] == '~' && i + 1 < token.size()) {
                t += token[i + 1] == '0' ? '~' : '/';
                ++i;
            } else {
                t += token[i];
            }
        }
        if (!cur->is_object() || !cur->contains(t)) return nullptr;
        cur = &(*cur)[t];
        pos = end == std::string::npos ? ref.size() : end;
    }
    return cur;
}

Json resolve_refs(const Json& node, const Json& doc, std::set<std::string>& active,
                  std::vector<std::string>& warnings) {
    if (node.is_object()) {
        if (node.contains("$ref") && node["$ref"].is_string()) {
            std::string ref = node["$ref"].get<std::string>();
            if (active.count(ref)) throw RefCycle(ref);
            const Json* target = lookup_pointer(doc, ref);
            if (!target) {
                warnings.push_back("unresolvable $ref: " + ref);
                return Json::object();
            }
            active.insert(ref);
            Json out = resolve_refs(*target, doc, active, warnings);
            active.erase(ref);
            return out;
        }
        Json out = Json::object();
        for (const auto& [k, v] : node.items()) out[k] = resolve_refs(v, doc, active, warnings);
        return out;
    }
    if (node.is_array()) {
        Json out = Json::array();
        for (const auto& v : node) out.push_back(resolve_refs(v, doc, active, warnings));
        return out;
    }
    return node;
}

std::size_t line_of_offset(std::string_view text, std::size_t byte) {
    return 1 + std::size_t(std::count(text.begin(), text.begin() + std::min(byte, text.size()),
                                      '\n'));
}

}  // namespace

std::string FieldLocator::to_string() const {
    switch (kind) {
        case Kind::Query: return "query:" + name;
        case Kind::Path: return "path:" + name;
        case Kind::Header: return "header:" + name;
        case Kind::Body: return "body:" + name;
    }
    return name;
}

FieldLocator FieldLocator::from_string(const std::string& s) {
    FieldLocator l;
    auto colon = s.find(':');
    std::string kind = colon == std::string::npos ? "body" : s.substr(0, colon);
    l.name = colon == std::string::npos ? s : s.substr(colon + 1);
    if (kind == "query") l.kind = Kind::Query;
    else if (kind == "path") l.kind = Kind::Path;
    else if (kind == "header") l.kind = Kind::Header;
    else l.kind = Kind::Body;
    return l;
}

ApiModel load_openapi(std::string_view document, DocumentFormat format, std::string source) {
    Json raw;
    if (format == DocumentFormat::Json) {
        try {
            raw = Json::parse(document);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.what(), line_of_offset(document, e.byte));
        }
    } else {
        try {
            raw = yaml_to_json(YAML::Load(std::string(document)));
        } catch (const YAML::Exception& e) {
            throw ParseError(e.what(), std::size_t(e.mark.line + 1));
        }
    }
    if (!raw.is_object()) throw ParseError("top-level document is not an object");
    std::string version = raw.value("openapi", "");
    if (version.rfind("3.", 0) != 0) throw UnsupportedVersion(version.empty() ? "(absent)" : version);

    ApiModel model;
    model.source = std::move(source);
    std::set<std::string> active;
    model.doc = resolve_refs(raw, raw, active, model.warnings);
    if (model.doc.contains("servers") && model.doc["servers"].is_array()) {
        for (const auto& s : model.doc["servers"])
            if (s.is_object() && s.contains("url")) model.server_urls.push_back(s["url"]);
    }
    if (model.server_urls.empty()) model.server_urls.push_back("/");
    return model;
}

namespace {

// Walks a resolved schema collecting string nodes carrying `pattern`.
// instance_ptr addresses the value inside a request instance; branch records
// the alternation branch (allOf/anyOf/oneOf) the pattern sits under.
void walk_schema(const Json& schema, const std::string& instance_ptr, const std::string& branch,
                 std::vector<std::tuple<std::string, std::string, const Json*>>& found) {
    if (!schema.is_object()) return;
    if (schema.contains("pattern") && schema["pattern"].is_string())
        found.emplace_back(instance_ptr, branch, &schema);
    if (schema.contains("properties") && schema["properties"].is_object()) {
        for (const auto& [k, v] : schema["properties"].items())
            walk_schema(v, instance_ptr + "/" + k, branch, found);
    }
    if (schema.contains("items"))
        walk_schema(schema["items"], instance_ptr + "/0", branch, found);
    for (const char* comb : {"allOf", "anyOf", "oneOf"}) {
        if (!schema.contains(comb) || !schema[comb].is_array()) continue;
        std::size_t i = 0;
        for (const auto& br : schema[comb]) {
            std::string b = branch.empty() ? std::string(comb) + "/" + std::to_string(i)
                                           : branch + "," + comb + "/" + std::to_string(i);
            walk_schema(br, instance_ptr, b, found);
            ++i;
        }
    }
}

// Required sibling fields of the same request: other required body
// properties plus required parameters.
std::vector<std::pair<std::string, Json>> siblings_of(const Json& body_schema,
                                                      const Json& parameters,
                                                      const FieldLocator& self) {
    std::vector<std::pair<std::string, Json>> out;
    if (body_schema.is_object() && body_schema.contains("required") &&
        body_schema.contains("properties")) {
        for (const auto& r : body_schema["required"]) {
            std::string name = r.get<std::string>();
            FieldLocator loc{FieldLocator::Kind::Body, "/" + name};
            if (loc == self || !body_schema["properties"].contains(name)) continue;
            out.emplace_back(loc.to_string(), body_schema["properties"][name]);
        }
    }
    for (const auto& p : parameters) {
        if (!p.is_object() || !p.value("required", false)) continue;
        std::string in = p.value("in", "query");
        FieldLocator loc;
        loc.kind = in == "path"     ? FieldLocator::Kind::Path
                   : in == "header" ? FieldLocator::Kind::Header
                                    : FieldLocator::Kind::Query;
        loc.name = p.value("name", "");
        if (loc == self) continue;
        out.emplace_back(loc.to_string(), p.contains("schema") ? p["schema"] : Json::object());
    }
    return out;
}

}  // namespace

std::vector<ApiSurface> extract_surfaces(const ApiModel& model) {
    std::vector<ApiSurface> out;
    if (!model.doc.contains("paths") || !model.doc["paths"].is_object()) return out;
    const std::string server = model.server_urls.front();

    for (const auto& [path, item] : model.doc["paths"].items()) {
        if (!item.is_object()) continue;
        Json shared_params = item.contains("parameters") ? item["parameters"] : Json::array();
        for (const char* verb : {"get", "put", "post", "delete", "patch", "head", "options"}) {
            if (!item.contains(verb)) continue;
            const Json& op = item[verb];
            if (!op.is_object()) continue;

            Json params = shared_params;
            if (op.contains("parameters"))
                for (const auto& p : op["parameters"]) params.push_back(p);

            Json body_schema;
            if (op.contains("requestBody") && op["requestBody"].is_object()) {
                const Json& rb = op["requestBody"];
                if (rb.contains("content") && rb["content"].is_object()) {
                    if (rb["content"].contains("application/json") &&
                        rb["content"]["application/json"].contains("schema")) {
                        body_schema = rb["content"]["application/json"]["schema"];
                    }
                }
            }

            auto add = [&](FieldLocator loc, const std::string& pattern,
                           const std::string& branch) {
                ApiSurface s;
                s.source_document = model.source;
                s.server_url = server;
                s.path_template = path;
                s.method = verb;
                std::transform(s.method.begin(), s.method.end(), s.method.begin(), ::toupper);
                s.field_locator = std::move(loc);
                s.pattern = pattern;
                s.branch = branch;
                s.anchor_mode = AnchorMode::UnanchoredSearch;
                s.body_schema = body_schema.is_null() ? Json() : body_schema;
                s.parameters = params;
                s.sibling_constraints = siblings_of(body_schema, params, s.field_locator);
                out.push_back(std::move(s));
            };

            for (const auto& p : params) {
                if (!p.is_object() || !p.contains("schema")) continue;
                std::vector<std::tuple<std::string, std::string, const Json*>> found;
                walk_schema(p["schema"], "", "", found);
                for (const auto& [ptr, branch, node] : found) {
                    if (!ptr.empty()) continue;  // parameters carry scalar schemas
                    std::string in = p.value("in", "query");
                    FieldLocator loc;
                    loc.kind = in == "path"     ? FieldLocator::Kind::Path
                               : in == "header" ? FieldLocator::Kind::Header
                                                : FieldLocator::Kind::Query;
                    loc.name = p.value("name", "");
                    add(std::move(loc), (*node)["pattern"].get<std::string>(), branch);
                }
            }
            if (body_schema.is_object()) {
                std::vector<std::tuple<std::string, std::string, const Json*>> found;
                walk_schema(body_schema, "", "", found);
                for (const auto& [ptr, branch, node] : found)
                    add({FieldLocator::Kind::Body, ptr},
                        (*node)["pattern"].get<std::string>(), branch);
            }
        }
    }
    return out;
}

Json ApiSurface::to_json() const {
    Json j;
    j["source_document"] = source_document;
    j["server_url"] = server_url;
    j["path_template"] = path_template;
    j["method"] = method;
    j["field_locator"] = field_locator.to_string();
    j["pattern"] = pattern;
    j["branch"] = branch;
    j["anchor_mode"] = redos::to_string(anchor_mode);
    j["body_schema"] = body_schema;
    j["parameters"] = parameters;
    Json sib = Json::array();
    for (const auto& [loc, schema] : sibling_constraints)
        sib.push_back({{"locator", loc}, {"schema", schema}});
    j["sibling_constraints"] = sib;
    return j;
}

ApiSurface ApiSurface::from_json(const Json& j) {
    ApiSurface s;
    s.source_document = j.value("source_document", "");
    s.server_url = j.value("server_url", "");
    s.path_template = j.value("path_template", "");
    s.method = j.value("method", "GET");
    s.field_locator = FieldLocator::from_string(j.value("field_locator", ""));
    s.pattern = j.value("pattern", "");
    s.branch = j.value("branch", "");
    s.anchor_mode = j.value("anchor_mode", "unanchored_search") == "full_match"
                        ? AnchorMode::FullMatch
                        : AnchorMode::UnanchoredSearch;
    if (j.contains("body_schema")) s.body_schema = j["body_schema"];
    if (j.contains("parameters")) s.parameters = j["parameters"];
    if (j.contains("sibling_constraints"))
        for (const auto& e : j["sibling_constraints"])
            s.sibling_constraints.emplace_back(e.value("locator", ""),
                                               e.contains("schema") ? e["schema"] : Json());
    return s;
}

Json FormSurface::to_json() const {
    return Json{{"page", page},
                {"form_action", form_action},
                {"form_method", form_method},
                {"field_name", field_name},
                {"pattern", pattern},
                {"anchor_mode", "full_match"}};
}

}  // namespace redos
