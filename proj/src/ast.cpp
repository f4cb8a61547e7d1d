#include "redos/ast.hpp"

#include <algorithm>

namespace redos {

std::string to_string(AnchorMode m) {
    return m == AnchorMode::FullMatch ? "full-match" : "unanchored-search";
}

bool ast_equal(const AstNode& a, const AstNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Literal:
            return a.literal == b.literal;
        case NodeKind::CharClass:
            return a.cls == b.cls && a.negated == b.negated;
        case NodeKind::Concat:
        case NodeKind::Alternation:
            if (a.children.size() != b.children.size()) return false;
            for (size_t i = 0; i < a.children.size(); ++i)
                if (!ast_equal(*a.children[i], *b.children[i])) return false;
            return true;
        case NodeKind::Repeat:
            return a.min == b.min && a.max == b.max && a.lazy == b.lazy &&
                   ast_equal(*a.child, *b.child);
        case NodeKind::Group:
            return a.capturing == b.capturing && ast_equal(*a.child, *b.child);
        default:
            return true;
    }
}

bool ast_equal(const RegexAst& a, const RegexAst& b) {
    return a.anchor_mode == b.anchor_mode && ast_equal(*a.root, *b.root);
}

namespace {

const char32_t kMeta[] = U"\\^$.|?*+()[]{}";

void print_codepoint(std::string& out, Codepoint c, bool in_class) {
    if (in_class) {
        if (c == U']' || c == U'\\' || c == U'^' || c == U'-') {
            out += '\\';
            out += char(c);
            return;
        }
    } else {
        for (Codepoint m : kMeta) {
            if (m != 0 && c == m) {
                out += '\\';
                out += char(c);
                return;
            }
        }
    }
    switch (c) {
        case U'\n': out += "\\n"; return;
        case U'\t': out += "\\t"; return;
        case U'\r': out += "\\r"; return;
        case U'\f': out += "\\f"; return;
        case U'\v': out += "\\v"; return;
    }
    if (c < 0x20 || (c >= 0x7F && c <= 0xFF)) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02X", unsigned(c));
        out += buf;
        return;
    }
    out += utf8_encode(c);
}

void print_class(std::string& out, const CharSet& effective, bool negated) {
    CharSet shown = negated ? effective.complement() : effective;
    out += '[';
    if (negated) out += '^';
    for (const auto& r : shown.ranges()) {
        print_codepoint(out, r.lo, true);
        if (r.hi > r.lo) {
            if (r.hi > r.lo + 1) out += '-';
            print_codepoint(out, r.hi, true);
        }
    }
    out += ']';
}

void print_node(std::string& out, const AstNode& n) {
    switch (n.kind) {
        case NodeKind::Literal:
            print_codepoint(out, n.literal, false);
            break;
        case NodeKind::Dot:
            out += '.';
            break;
        case NodeKind::CharClass:
            print_class(out, n.cls, n.negated);
            break;
        case NodeKind::Concat:
            for (const auto& c : n.children) print_node(out, *c);
            break;
        case NodeKind::Alternation:
            for (size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += '|';
                print_node(out, *n.children[i]);
            }
            break;
        case NodeKind::Repeat: {
            print_node(out, *n.child);
            if (n.min == 0 && n.max == kUnboundedRepeat) out += '*';
            else if (n.min == 1 && n.max == kUnboundedRepeat) out += '+';
            else if (n.min == 0 && n.max == 1) out += '?';
            else if (n.min == n.max) out += "{" + std::to_string(n.min) + "}";
            else if (n.max == kUnboundedRepeat) out += "{" + std::to_string(n.min) + ",}";
            else out += "{" + std::to_string(n.min) + "," + std::to_string(n.max) + "}";
            if (n.lazy) out += '?';
            break;
        }
        case NodeKind::Group:
            out += n.capturing ? "(" : "(?:";
            print_node(out, *n.child);
            out += ')';
            break;
        case NodeKind::AnchorStart:
            out += '^';
            break;
        case NodeKind::AnchorEnd:
            out += '$';
            break;
        case NodeKind::Empty:
            break;
    }
}

}  // namespace

std::string print_ast(const RegexAst& ast) {
    std::string out;
    print_node(out, *ast.root);
    return out;
}

std::size_t desugared_size(const AstNode& n) {
    switch (n.kind) {
        case NodeKind::Concat:
        case NodeKind::Alternation: {
            std::size_t s = 1;
            for (const auto& c : n.children) s += desugared_size(*c);
            return s;
        }
        case NodeKind::Group:
            return 1 + desugared_size(*n.child);
        case NodeKind::Repeat: {
            std::size_t copies =
                n.max == kUnboundedRepeat ? std::size_t(n.min) + 1 : std::max<std::size_t>(n.max, 1);
            return 1 + copies * desugared_size(*n.child);
        }
        default:
            return 1;
    }
}

}  // namespace redos
