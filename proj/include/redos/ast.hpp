#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "redos/chars.hpp"

namespace redos {

// Whether a pattern must consume the whole input (HTML `pattern` semantics)
// or may match any substring (JSON-Schema `pattern` semantics).
enum class AnchorMode { FullMatch, UnanchoredSearch };

std::string to_string(AnchorMode m);

enum class NodeKind {
    Literal,
    Dot,
    CharClass,
    Concat,
    Alternation,
    Repeat,
    Group,
    AnchorStart,
    AnchorEnd,
    Empty,
};

inline constexpr std::uint32_t kUnboundedRepeat = std::numeric_limits<std::uint32_t>::max();

struct AstNode {
    NodeKind kind = NodeKind::Empty;
    Codepoint literal = 0;                        // Literal
    CharSet cls;                                  // CharClass (already complemented if negated)
    bool negated = false;                         // CharClass: written as [^...]
    std::vector<std::shared_ptr<AstNode>> children;  // Concat, Alternation
    std::shared_ptr<AstNode> child;               // Repeat, Group
    std::uint32_t min = 0;                        // Repeat
    std::uint32_t max = 0;                        // Repeat; kUnboundedRepeat = no bound
    bool lazy = false;                            // Repeat
    bool capturing = true;                        // Group

    static std::shared_ptr<AstNode> make(NodeKind k) {
        auto n = std::make_shared<AstNode>();
        n->kind = k;
        return n;
    }
};

struct RegexAst {
    std::shared_ptr<AstNode> root;
    AnchorMode anchor_mode = AnchorMode::FullMatch;
    // Leading ^ / trailing $ written in the pattern; meaningful under
    // UnanchoredSearch, redundant under FullMatch.
    bool starts_anchored = false;
    bool ends_anchored = false;
};

// Structural equality, ignoring Group capturing-ness is NOT done: the
// round-trip property needs print/parse to reproduce the tree exactly.
bool ast_equal(const AstNode& a, const AstNode& b);
bool ast_equal(const RegexAst& a, const RegexAst& b);

// Re-serialize an AST to pattern text such that parse(print(ast)) == ast.
std::string print_ast(const RegexAst& ast);

// Number of nodes after desugaring bounded repeats ({m,n} counted as the
// states its expansion will need). Used by the linear-size bound check.
std::size_t desugared_size(const AstNode& node);

}  // namespace redos
