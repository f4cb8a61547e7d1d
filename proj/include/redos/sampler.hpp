#pragma once

#include <cstdint>
#include <string>

#include "redos/nfa.hpp"

namespace redos {

// Random member of the NFA's language with length <= max_len; deterministic
// for a fixed seed and re-checked against the linear engine before returning.
// Throws NoWitnessWithinLength when no accepting path is short enough.
std::string sample_member(const Nfa& nfa, std::size_t max_len, std::uint64_t seed);

}  // namespace redos
