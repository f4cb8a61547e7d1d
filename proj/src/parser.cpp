#include "redos/parser.hpp"

#include <cctype>

namespace redos {

const CharSet& dot_set() {
    static const CharSet s = CharSet::any();
    return s;
}

const CharSet& digit_set() {
    static const CharSet s = CharSet::range(U'0', U'9');
    return s;
}

const CharSet& word_set() {
    static const CharSet s = CharSet({{U'0', U'9'}, {U'A', U'Z'}, {U'_', U'_'}, {U'a', U'z'}});
    return s;
}

const CharSet& space_set() {
    static const CharSet s =
        CharSet({{U'\t', U'\r'}, {U' ', U' '}, {0x00A0, 0x00A0}, {0x2028, 0x2029}});
    return s;
}

namespace {

class Parser {
public:
    Parser(std::u32string text) : text_(std::move(text)) {}

    std::shared_ptr<AstNode> run() {
        auto node = parse_alternation();
        if (pos_ < text_.size()) {
            fail("unbalanced ')'");
        }
        return node;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw RegexSyntaxError(pos_, msg); }

    bool at_end() const { return pos_ >= text_.size(); }
    Codepoint peek() const { return text_[pos_]; }
    Codepoint next() { return text_[pos_++]; }
    bool eat(Codepoint c) {
        if (!at_end() && peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::shared_ptr<AstNode> parse_alternation() {
        std::vector<std::shared_ptr<AstNode>> branches;
        branches.push_back(parse_concat());
        while (eat(U'|')) branches.push_back(parse_concat());
        if (branches.size() == 1) return branches.front();
        auto node = AstNode::make(NodeKind::Alternation);
        node->children = std::move(branches);
        return node;
    }

    std::shared_ptr<AstNode> parse_concat() {
        std::vector<std::shared_ptr<AstNode>> items;
        while (!at_end() && peek() != U'|' && peek() != U')') {
            items.push_back(parse_quantified());
        }
        if (items.empty()) return AstNode::make(NodeKind::Empty);
        if (items.size() == 1) return items.front();
        auto node = AstNode::make(NodeKind::Concat);
        node->children = std::move(items);
        return node;
    }

    std::shared_ptr<AstNode> parse_quantified() {
        auto atom = parse_atom();
        while (!at_end()) {
            std::uint32_t min = 0, max = 0;
            bool got = false;
            if (peek() == U'*') {
                min = 0; max = kUnboundedRepeat; ++pos_; got = true;
            } else if (peek() == U'+') {
                min = 1; max = kUnboundedRepeat; ++pos_; got = true;
            } else if (peek() == U'?') {
                min = 0; max = 1; ++pos_; got = true;
            } else if (peek() == U'{') {
                size_t save = pos_;
                got = parse_bounds(min, max);
                if (!got) pos_ = save;  // literal '{'
            }
            if (!got) break;
            if (atom->kind == NodeKind::AnchorStart || atom->kind == NodeKind::AnchorEnd) {
                fail("quantifier on anchor");
            }
            if (atom->kind == NodeKind::Repeat) {
                fail("double quantifier");
            }
            auto rep = AstNode::make(NodeKind::Repeat);
            rep->child = atom;
            rep->min = min;
            rep->max = max;
            rep->lazy = eat(U'?');
            atom = rep;
        }
        return atom;
    }

    // Parses "{m}", "{m,}" or "{m,n}" including the closing brace.
    // Returns false (without reporting) when the braces do not form a
    // quantifier, in which case '{' is taken literally.
    bool parse_bounds(std::uint32_t& min, std::uint32_t& max) {
        ++pos_;  // '{'
        std::uint64_t m = 0;
        bool any = false;
        while (!at_end() && peek() >= U'0' && peek() <= U'9') {
            m = m * 10 + (next() - U'0');
            if (m > 100000) fail("repetition bound too large");
            any = true;
        }
        if (!any) return false;
        min = std::uint32_t(m);
        if (eat(U'}')) {
            max = min;
            return true;
        }
        if (!eat(U',')) return false;
        if (eat(U'}')) {
            max = kUnboundedRepeat;
            return true;
        }
        std::uint64_t n = 0;
        any = false;
        while (!at_end() && peek() >= U'0' && peek() <= U'9') {
            n = n * 10 + (next() - U'0');
            if (n > 100000) fail("repetition bound too large");
            any = true;
        }
        if (!any || !eat(U'}')) return false;
        if (n < min) fail("repetition bounds out of order");
        max = std::uint32_t(n);
        return true;
    }

    std::shared_ptr<AstNode> parse_atom() {
        Codepoint c = next();
        switch (c) {
            case U'(':
                return parse_group();
            case U'[':
                return parse_class();
            case U'.': {
                return AstNode::make(NodeKind::Dot);
            }
            case U'^':
                return AstNode::make(NodeKind::AnchorStart);
            case U'$':
                return AstNode::make(NodeKind::AnchorEnd);
            case U'\\':
                return parse_escape(/*in_class=*/false);
            case U'*':
            case U'+':
            case U'?':
                fail("quantifier with nothing to repeat");
            case U')':
                fail("unbalanced ')'");  // unreachable; parse_concat stops on ')'
            default: {
                auto node = AstNode::make(NodeKind::Literal);
                node->literal = c;
                return node;
            }
        }
    }

    std::shared_ptr<AstNode> parse_group() {
        bool capturing = true;
        if (eat(U'?')) {
            if (eat(U':')) {
                capturing = false;
            } else if (at_end()) {
                fail("dangling '(?'");
            } else {
                Codepoint k = peek();
                if (k == U'=') throw UnsupportedFeature("lookahead");
                if (k == U'!') throw UnsupportedFeature("negative lookahead");
                if (k == U'<') {
                    ++pos_;
                    if (!at_end() && (peek() == U'=' || peek() == U'!'))
                        throw UnsupportedFeature("lookbehind");
                    throw UnsupportedFeature("named group");
                }
                if (k == U'>') throw UnsupportedFeature("atomic group");
                if (k == U'P') throw UnsupportedFeature("named group");
                throw UnsupportedFeature("group modifier");
            }
        }
        auto inner = parse_alternation();
        if (!eat(U')')) fail("missing ')'");
        auto node = AstNode::make(NodeKind::Group);
        node->child = inner;
        node->capturing = capturing;
        return node;
    }

    std::shared_ptr<AstNode> parse_escape(bool in_class) {
        if (at_end()) fail("dangling backslash");
        Codepoint c = next();
        auto cls_node = [](const CharSet& s, bool neg) {
            auto n = AstNode::make(NodeKind::CharClass);
            n->cls = neg ? s.complement() : s;
            n->negated = neg;
            return n;
        };
        auto lit = [](Codepoint ch) {
            auto n = AstNode::make(NodeKind::Literal);
            n->literal = ch;
            return n;
        };
        switch (c) {
            case U'd': return cls_node(digit_set(), false);
            case U'D': return cls_node(digit_set(), true);
            case U'w': return cls_node(word_set(), false);
            case U'W': return cls_node(word_set(), true);
            case U's': return cls_node(space_set(), false);
            case U'S': return cls_node(space_set(), true);
            case U'n': return lit(U'\n');
            case U't': return lit(U'\t');
            case U'r': return lit(U'\r');
            case U'f': return lit(U'\f');
            case U'v': return lit(U'\v');
            case U'0': return lit(U'\0');
            case U'x': {
                Codepoint v = 0;
                for (int i = 0; i < 2; ++i) {
                    if (at_end()) fail("bad \\xHH escape");
                    v = v * 16 + hex_val(next());
                }
                return lit(v);
            }
            case U'u': {
                Codepoint v = 0;
                for (int i = 0; i < 4; ++i) {
                    if (at_end()) fail("bad \\uHHHH escape");
                    v = v * 16 + hex_val(next());
                }
                return lit(v);
            }
            case U'b':
                if (in_class) return lit(U'\b');
                throw UnsupportedFeature("word boundary");
            case U'B': throw UnsupportedFeature("word boundary");
            case U'p':
            case U'P': throw UnsupportedFeature("unicode property class");
            case U'k': throw UnsupportedFeature("backreference");
            case U'A':
            case U'Z':
            case U'z':
            case U'G': throw UnsupportedFeature("text anchor escape");
            default:
                if (c >= U'1' && c <= U'9') throw UnsupportedFeature("backreference");
                if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'))
                    throw UnsupportedFeature(std::string("escape \\") + char(c));
                return lit(c);
        }
    }

    Codepoint hex_val(Codepoint c) {
        if (c >= U'0' && c <= U'9') return c - U'0';
        if (c >= U'a' && c <= U'f') return c - U'a' + 10;
        if (c >= U'A' && c <= U'F') return c - U'A' + 10;
        fail("bad hex digit");
    }

    std::shared_ptr<AstNode> parse_class() {
        bool negated = eat(U'^');
        CharSet set;
        bool first = true;
        while (true) {
            if (at_end()) fail("missing ']'");
            if (peek() == U']' && !first) {
                ++pos_;
                break;
            }
            first = false;
            CharSet lo_set;
            Codepoint lo = 0;
            bool lo_is_char = class_item(lo, lo_set);
            if (lo_is_char && !at_end() && peek() == U'-' && pos_ + 1 < text_.size() &&
                text_[pos_ + 1] != U']') {
                ++pos_;  // '-'
                CharSet hi_set;
                Codepoint hi = 0;
                if (!class_item(hi, hi_set)) fail("shorthand class as range bound");
                if (hi < lo) fail("range out of order");
                set.add(lo, hi);
            } else if (lo_is_char) {
                set.add(lo, lo);
            } else {
                set = set.unite(lo_set);
            }
        }
        if (negated && set.complement().empty()) fail("negated class matches nothing");
        auto node = AstNode::make(NodeKind::CharClass);
        node->cls = negated ? set.complement() : set;
        node->negated = negated;
        if (node->cls.empty()) fail("empty character class");
        return node;
    }

    // Reads one class member. Returns true and sets `c` for a single
    // character, false and sets `s` for a shorthand class escape.
    bool class_item(Codepoint& c, CharSet& s) {
        Codepoint ch = next();
        if (ch != U'\\') {
            c = ch;
            return true;
        }
        auto node = parse_escape(/*in_class=*/true);
        if (node->kind == NodeKind::Literal) {
            c = node->literal;
            return true;
        }
        s = node->cls;
        return false;
    }

    std::u32string text_;
    size_t pos_ = 0;
};

bool leading_anchor(const AstNode& n) {
    switch (n.kind) {
        case NodeKind::AnchorStart: return true;
        case NodeKind::Group: return n.child && leading_anchor(*n.child);
        case NodeKind::Concat: return !n.children.empty() && leading_anchor(*n.children.front());
        case NodeKind::Alternation: {
            for (const auto& c : n.children)
                if (!leading_anchor(*c)) return false;
            return !n.children.empty();
        }
        default: return false;
    }
}

bool trailing_anchor(const AstNode& n) {
    switch (n.kind) {
        case NodeKind::AnchorEnd: return true;
        case NodeKind::Group: return n.child && trailing_anchor(*n.child);
        case NodeKind::Concat: return !n.children.empty() && trailing_anchor(*n.children.back());
        case NodeKind::Alternation: {
            for (const auto& c : n.children)
                if (!trailing_anchor(*c)) return false;
            return !n.children.empty();
        }
        default: return false;
    }
}

}  // namespace

RegexAst parse(std::string_view pattern, AnchorMode anchor_mode) {
    if (pattern.empty()) throw RegexSyntaxError(0, "empty pattern");
    Parser p(utf8_decode(pattern));
    RegexAst ast;
    ast.root = p.run();
    ast.anchor_mode = anchor_mode;
    ast.starts_anchored = leading_anchor(*ast.root);
    ast.ends_anchored = trailing_anchor(*ast.root);
    return ast;
}

}  // namespace redos
