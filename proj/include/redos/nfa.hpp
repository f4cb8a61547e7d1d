#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redos/ast.hpp"
#include "redos/errors.hpp"

namespace redos {

using StateId = std::uint32_t;

struct NfaEdge {
    CharSet on;
    StateId to;
};

// Epsilon-free, trimmed NFA over codepoints. Represents the language of the
// pattern body; anchoring is applied by the engines.
struct Nfa {
    StateId start = 0;
    std::vector<std::vector<NfaEdge>> edges;  // indexed by state
    std::vector<bool> accept;

    std::size_t size() const { return edges.size(); }
    bool empty_language() const { return accept.empty(); }
};

inline constexpr std::size_t kDefaultStateCap = 10000;

// Thompson construction followed by epsilon elimination and trimming.
// Bounded repeats are expanded; throws ExpansionLimit past `state_cap`.
// Throws UnsupportedFeature for anchors not at the pattern edges.
Nfa compile_nfa(const RegexAst& ast, std::size_t state_cap = kDefaultStateCap);

// Line-based debug dump: "from -> to on [set]" plus start/accept header.
std::string dump_nfa(const Nfa& nfa);

// One representative codepoint per equivalence class of the NFA's transition
// ranges, plus (when one exists) a codepoint no transition accepts.
// Printable representatives preferred.
std::vector<Codepoint> alphabet_representatives(const Nfa& nfa);

// A codepoint outside every transition set, if the NFA does not use the whole
// universe; printable preferred.
bool dead_codepoint(const Nfa& nfa, Codepoint& out);

}  // namespace redos
