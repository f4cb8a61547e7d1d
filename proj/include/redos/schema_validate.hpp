#pragma once

#include <string>
#include <vector>

#include "redos/engines.hpp"
#include "redos/openapi.hpp"

namespace redos {

struct Violation {
    std::string locator;     // instance locator, e.g. "body:/card" or "query:limit"
    std::string constraint;  // "required" | "type" | "minimum" | ... | "pattern"
    std::string detail;

    Json to_json() const {
        return Json{{"locator", locator}, {"constraint", constraint}, {"detail", detail}};
    }
};

struct ValidationOutcome {
    std::vector<Violation> violations;
    bool budget_exhausted = false;  // a pattern check ran out of engine budget

    bool passed() const { return violations.empty() && !budget_exhausted; }
};

// Validates one value against a resolved schema node, reporting every
// violated supported keyword. Constraints are evaluated in a fixed order per
// node: required -> type -> bounds/lengths -> enum -> pattern. The pattern
// keyword runs last so that length constraints can shield it: when a length
// check fails, the pattern is not evaluated at all.
ValidationOutcome validate_value(const Json& schema, const Json& value,
                                 const std::string& locator, const EngineFactory& engines);

}  // namespace redos
