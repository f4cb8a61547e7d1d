#pragma once

#include <string_view>

#include "redos/ast.hpp"
#include "redos/errors.hpp"

namespace redos {

// The character set matched by `.` (any codepoint except newline).
const CharSet& dot_set();

// Shorthand class sets.
const CharSet& digit_set();
const CharSet& word_set();
const CharSet& space_set();

// Parse a pattern in the supported dialect (shared ECMA-262 / Java / Python
// subset). Throws RegexSyntaxError on malformed input and UnsupportedFeature
// for backreferences, lookaround and other out-of-dialect constructs.
RegexAst parse(std::string_view pattern, AnchorMode anchor_mode);

}  // namespace redos
