#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "redos/ambiguity.hpp"
#include "redos/openapi.hpp"
#include "redos/schema_validate.hpp"

namespace redos {

struct UnsatisfiableSchema : std::runtime_error {
    explicit UnsatisfiableSchema(const std::string& why)
        : std::runtime_error("unsatisfiable schema: " + why) {}
};

struct MissingOverride : std::runtime_error {
    explicit MissingOverride(const std::string& locator)
        : std::runtime_error("externally-supplied value required for " + locator),
          locator(locator) {}
    std::string locator;
};

struct FieldNotFound : std::runtime_error {
    explicit FieldNotFound(const std::string& locator)
        : std::runtime_error("injected field not found: " + locator) {}
};

struct ControlUnavailable : std::runtime_error {
    explicit ControlUnavailable(const std::string& why)
        : std::runtime_error("no linear-rejecting control string: " + why) {}
};

enum class PayloadClass { Valid, Control, Treatment };

struct RequestPlan {
    std::string method;
    std::string url;  // absolute, path params substituted
    std::vector<std::pair<std::string, std::string>> headers;
    std::vector<std::pair<std::string, std::string>> query;
    Json body;  // null when the request has no body
    std::optional<FieldLocator> injected_field;
    PayloadClass payload_class = PayloadClass::Valid;
    std::size_t pumps = 0;           // Treatment
    std::size_t injected_length = 0; // Control and Treatment

    // Carried for local validation and re-injection.
    std::string path_template;
    std::map<std::string, std::string> path_values;

    std::string injected_value() const;
    Json to_json() const;
};

struct LocalValidation {
    ValidationOutcome outcome;
    bool passed() const { return outcome.passed(); }
};

using Overrides = std::map<std::string, Json>;  // locator string -> value

// Type-directed generation of a value satisfying every supported keyword of
// the node; pattern-constrained strings are drawn from the pattern's NFA.
// Deterministic per seed.
Json generate_valid_value(const Json& schema, std::uint64_t seed);

// Locally valid request for the surface: sibling constraints satisfied via
// generate_valid_value unless overridden. Path parameters are
// externally-supplied: absent an override (or a generatable schema), they
// raise MissingOverride.
RequestPlan build_request(const ApiSurface& surface, const Overrides& overrides,
                          std::uint64_t seed);

// Replaces the target field's value with prefix + pump^pumps + suffix.
RequestPlan inject_probe(const RequestPlan& plan, const ApiSurface& surface,
                         const AttackTemplate& tmpl, std::size_t pumps);

// Same-length rejecting payload for the control group, verified to be
// rejected in linear time by both engines before use.
RequestPlan make_control(const RequestPlan& plan, const ApiSurface& surface, std::size_t length,
                         std::uint64_t seed);

// In-process stand-in for a validating proxy: Pass iff every supported
// constraint of the targeted operation holds.
LocalValidation validate_local(const ApiModel& model, const RequestPlan& plan,
                               const EngineFactory& engines);
LocalValidation validate_local(const ApiSurface& surface, const RequestPlan& plan,
                               const EngineFactory& engines);

}  // namespace redos
