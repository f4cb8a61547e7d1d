#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "redos/engines.hpp"
#include "redos/nfa.hpp"

namespace redos {

enum class WitnessKind { Exponential, Polynomial };

struct AmbiguityWitness {
    WitnessKind kind = WitnessKind::Exponential;
    int degree = 2;  // Polynomial only; chain estimation floors at 2
    std::vector<StateId> pivot_states;
    std::string pump;  // UTF-8
};

struct AttackTemplate {
    std::string prefix;
    std::string pump;  // non-empty
    std::string suffix;
    AnchorMode anchor_mode = AnchorMode::FullMatch;

    std::string instantiate(std::size_t pumps) const;
};

inline constexpr std::size_t kDefaultProductCap = 1'000'000;
inline constexpr std::size_t kMaxPumpLength = 16;

// Self-product SCC test: exponential ambiguity iff some SCC of NFAxNFA holds
// a diagonal state plus an edge whose two underlying NFA transitions differ
// (a non-diagonal state, or distinct parallel edges). Shortest pump preferred.
std::optional<AmbiguityWitness> detect_exponential(const Nfa& nfa,
                                                   std::size_t product_cap = kDefaultProductCap);

// Triple-product reachability (p,p,q) ->w (p,q,q) for p != q.
std::optional<AmbiguityWitness> detect_polynomial(const Nfa& nfa,
                                                  std::size_t product_cap = kDefaultProductCap);

// Builds prefix/pump/suffix such that prefix + pump^i + suffix is rejected for
// all i in 0..=5 (re-checked with the linear engine before returning).
// nullopt = no rejecting suffix exists (e.g. the pattern matches everything).
std::optional<AttackTemplate> build_attack_template(const Nfa& nfa, const AmbiguityWitness& w,
                                                    AnchorMode anchor_mode,
                                                    bool starts_anchored = false,
                                                    bool ends_anchored = false);

struct StaticReport {
    std::string pattern;
    AnchorMode anchor_mode = AnchorMode::UnanchoredSearch;
    bool dialect_ok = true;
    std::string skip_reason;  // unsupported feature, syntax error, analysis budget
    std::string kind = "none";  // "exponential" | "polynomial" | "none"
    int degree = 0;
    std::optional<AmbiguityWitness> exp_witness;
    std::optional<AmbiguityWitness> poly_witness;
    std::optional<AttackTemplate> attack;
    std::string template_absence;  // set when a witness exists but no template

    nlohmann::json to_json() const;
};

// parse -> compile -> detect_exponential, else detect_polynomial -> template.
// Total over text: all failures are embedded in the report.
StaticReport analyze(std::string_view pattern, AnchorMode anchor_mode);

}  // namespace redos
