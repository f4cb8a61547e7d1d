#include "redos/schema_validate.hpp"

#include "redos/chars.hpp"

namespace redos {

namespace {

const char* type_name(const Json& v) {
    if (v.is_null()) return "null";
    if (v.is_boolean()) return "boolean";
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    if (v.is_string()) return "string";
    if (v.is_array()) return "array";
    return "object";
}

bool type_matches(const std::string& want, const Json& v) {
    if (want == "number") return v.is_number();
    if (want == "integer") return v.is_number_integer();
    return want == type_name(v);
}

void check_node(const Json& schema, const Json& value, const std::string& locator,
                const EngineFactory& engines, ValidationOutcome& out) {
    if (!schema.is_object()) return;

    // required (object property presence)
    if (schema.contains("required") && value.is_object()) {
        for (const auto& r : schema["required"]) {
            std::string name = r.get<std::string>();
            if (!value.contains(name))
                out.violations.push_back(
                    {locator + "/" + name, "required", "missing required property"});
        }
    }

    // type
    if (schema.contains("type") && schema["type"].is_string()) {
        std::string want = schema["type"].get<std::string>();
        if (!type_matches(want, value)) {
            out.violations.push_back(
                {locator, "type", std::string("expected ") + want + ", got " + type_name(value)});
            return;  // remaining keywords are type-specific
        }
    }

    // bounds / lengths
    bool length_ok = true;
    if (value.is_number()) {
        double v = value.get<double>();
        if (schema.contains("minimum") && v < schema["minimum"].get<double>())
            out.violations.push_back({locator, "minimum", "below minimum"});
        if (schema.contains("maximum") && v > schema["maximum"].get<double>())
            out.violations.push_back({locator, "maximum", "above maximum"});
    }
    if (value.is_string()) {
        std::size_t len = utf8_decode(value.get<std::string>()).size();
        if (schema.contains("minLength") && len < schema["minLength"].get<std::size_t>()) {
            out.violations.push_back({locator, "minLength", "shorter than minLength"});
            length_ok = false;
        }
        if (schema.contains("maxLength") && len > schema["maxLength"].get<std::size_t>()) {
            out.violations.push_back({locator, "maxLength", "longer than maxLength"});
            length_ok = false;
        }
    }

    // enum
    if (schema.contains("enum")) {
        bool hit = false;
        for (const auto& e : schema["enum"])
            if (e == value) hit = true;
        if (!hit) out.violations.push_back({locator, "enum", "value not in enum"});
    }

    // pattern -- last, and shielded by a failed length check
    if (schema.contains("pattern") && value.is_string() && length_ok) {
        try {
            CompiledRegex re = compile_regex(schema["pattern"].get<std::string>(),
                                             AnchorMode::UnanchoredSearch);
            MatchOutcome m = engines.make()->match(re, value.get<std::string>());
            if (m.budget_exhausted)
                out.budget_exhausted = true;
            else if (!m.matched)
                out.violations.push_back({locator, "pattern", "value does not match pattern"});
        } catch (const std::exception& e) {
            out.violations.push_back({locator, "pattern", std::string("unanalyzable: ") + e.what()});
        }
    }

    // recurse
    if (value.is_object() && schema.contains("properties") && schema["properties"].is_object()) {
        for (const auto& [k, sub] : schema["properties"].items())
            if (value.contains(k)) check_node(sub, value[k], locator + "/" + k, engines, out);
    }
    if (value.is_array() && schema.contains("items")) {
        std::size_t i = 0;
        for (const auto& item : value) {
            check_node(schema["items"], item, locator + "/" + std::to_string(i), engines, out);
            ++i;
        }
    }
    for (const char* comb : {"allOf", "anyOf", "oneOf"}) {
        if (!schema.contains(comb)) continue;
        // Branches validated as allOf; anyOf/oneOf are treated conservatively
        // the same way since server behavior may validate any branch.
        for (const auto& br : schema[comb]) check_node(br, value, locator, engines, out);
    }
}

}  // namespace

ValidationOutcome validate_value(const Json& schema, const Json& value,
                                 const std::string& locator, const EngineFactory& engines) {
    ValidationOutcome out;
    check_node(schema, value, locator, engines, out);
    return out;
}

}  // namespace redos
