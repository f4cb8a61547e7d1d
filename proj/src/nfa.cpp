#include "redos/nfa.hpp"

#include "redos/parser.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>

namespace redos {

namespace {

// Epsilon-NFA under construction.
struct Builder {
    struct Edge {
        std::optional<CharSet> on;  // nullopt = epsilon
        StateId to;
    };
    std::vector<std::vector<Edge>> states;
    std::size_t cap;

    StateId add_state() {
        if (states.size() >= cap) throw ExpansionLimit(cap);
        states.emplace_back();
        return StateId(states.size() - 1);
    }
    void link(StateId a, StateId b) { states[a].push_back({std::nullopt, b}); }
    void link(StateId a, const CharSet& on, StateId b) { states[a].push_back({on, b}); }
};

struct Frag {
    StateId in, out;
};

bool zero_width_only(const AstNode& n) {
    switch (n.kind) {
        case NodeKind::Empty:
        case NodeKind::AnchorStart:
        case NodeKind::AnchorEnd:
            return true;
        case NodeKind::Group:
            return zero_width_only(*n.child);
        case NodeKind::Concat:
        case NodeKind::Alternation:
            return std::all_of(n.children.begin(), n.children.end(),
                               [](const auto& c) { return zero_width_only(*c); });
        case NodeKind::Repeat:
            return n.max == 0 || zero_width_only(*n.child);
        default:
            return false;
    }
}

// Anchors are representable as plain epsilon only at the pattern edges;
// anything else leaves the dialect.
void check_anchor_positions(const AstNode& n, bool at_start, bool at_end) {
    switch (n.kind) {
        case NodeKind::AnchorStart:
            if (!at_start) throw UnsupportedFeature("mid-pattern start anchor");
            break;
        case NodeKind::AnchorEnd:
            if (!at_end) throw UnsupportedFeature("mid-pattern end anchor");
            break;
        case NodeKind::Group:
            check_anchor_positions(*n.child, at_start, at_end);
            break;
        case NodeKind::Alternation:
            for (const auto& c : n.children) check_anchor_positions(*c, at_start, at_end);
            break;
        case NodeKind::Concat:
            for (size_t i = 0; i < n.children.size(); ++i) {
                bool before_zw = true, after_zw = true;
                for (size_t j = 0; j < i; ++j) before_zw &= zero_width_only(*n.children[j]);
                for (size_t j = i + 1; j < n.children.size(); ++j)
                    after_zw &= zero_width_only(*n.children[j]);
                check_anchor_positions(*n.children[i], at_start && before_zw, at_end && after_zw);
            }
            break;
        case NodeKind::Repeat:
            check_anchor_positions(*n.child, at_start && n.max <= 1, at_end && n.max <= 1);
            break;
        default:
            break;
    }
}

Frag build(Builder& b, const AstNode& n);

Frag build_optional(Builder& b, const AstNode& child) {
    StateId in = b.add_state();
    StateId out = b.add_state();
    Frag f = build(b, child);
    b.link(in, f.in);
    b.link(in, out);
    b.link(f.out, out);
    return {in, out};
}

Frag build_star(Builder& b, const AstNode& child) {
    StateId in = b.add_state();
    StateId out = b.add_state();
    Frag f = build(b, child);
    b.link(in, f.in);
    b.link(in, out);
    b.link(f.out, f.in);
    b.link(f.out, out);
    return {in, out};
}

Frag build(Builder& b, const AstNode& n) {
    switch (n.kind) {
        case NodeKind::Empty:
        case NodeKind::AnchorStart:
        case NodeKind::AnchorEnd: {
            StateId in = b.add_state();
            StateId out = b.add_state();
            b.link(in, out);
            return {in, out};
        }
        case NodeKind::Literal: {
            StateId in = b.add_state();
            StateId out = b.add_state();
            b.link(in, CharSet::single(n.literal), out);
            return {in, out};
        }
        case NodeKind::Dot: {
            StateId in = b.add_state();
            StateId out = b.add_state();
            b.link(in, dot_set(), out);
            return {in, out};
        }
        case NodeKind::CharClass: {
            StateId in = b.add_state();
            StateId out = b.add_state();
            b.link(in, n.cls, out);
            return {in, out};
        }
        case NodeKind::Group:
            return build(b, *n.child);
        case NodeKind::Concat: {
            Frag acc{0, 0};
            bool first = true;
            for (const auto& c : n.children) {
                Frag f = build(b, *c);
                if (first) {
                    acc = f;
                    first = false;
                } else {
                    b.link(acc.out, f.in);
                    acc.out = f.out;
                }
            }
            if (first) {
                StateId in = b.add_state();
                StateId out = b.add_state();
                b.link(in, out);
                return {in, out};
            }
            return acc;
        }
        case NodeKind::Alternation: {
            StateId in = b.add_state();
            StateId out = b.add_state();
            for (const auto& c : n.children) {
                Frag f = build(b, *c);
                b.link(in, f.in);
                b.link(f.out, out);
            }
            return {in, out};
        }
        case NodeKind::Repeat: {
            // min mandatory copies, then (max-min) optionals or a star tail.
            Frag acc{0, 0};
            bool first = true;
            auto append = [&](Frag f) {
                if (first) {
                    acc = f;
                    first = false;
                } else {
                    b.link(acc.out, f.in);
                    acc.out = f.out;
                }
            };
            for (std::uint32_t i = 0; i < n.min; ++i) append(build(b, *n.child));
            if (n.max == kUnboundedRepeat) {
                append(build_star(b, *n.child));
            } else {
                for (std::uint32_t i = n.min; i < n.max; ++i) append(build_optional(b, *n.child));
            }
            if (first) {  // {0,0}
                StateId in = b.add_state();
                StateId out = b.add_state();
                b.link(in, out);
                return {in, out};
            }
            return acc;
        }
    }
    throw std::logic_error("unreachable node kind");
}

std::vector<Codepoint> set_key(const CharSet& s) {
    std::vector<Codepoint> k;
    for (const auto& r : s.ranges()) {
        k.push_back(r.lo);
        k.push_back(r.hi);
    }
    return k;
}

// Quotient by identical-row equivalence (forward bisimulation with edge
// multiplicity). Merging states with identical outgoing rows preserves the
// language and the number of accepting paths per input, while exposing
// duplicated structure as parallel edges on a single state.
Nfa quotient(const Nfa& in) {
    const StateId n = in.size();
    std::vector<std::uint32_t> cls(n);
    for (StateId q = 0; q < n; ++q) cls[q] = in.accept[q] ? 1 : 0;
    std::size_t count = 0;
    for (;;) {
        using Row = std::vector<std::pair<std::vector<Codepoint>, std::uint32_t>>;
        std::map<std::pair<std::uint32_t, Row>, std::uint32_t> ids;
        std::vector<std::uint32_t> next(n);
        for (StateId q = 0; q < n; ++q) {
            Row row;
            row.reserve(in.edges[q].size());
            for (const auto& e : in.edges[q]) row.emplace_back(set_key(e.on), cls[e.to]);
            std::sort(row.begin(), row.end());
            auto [it, fresh] = ids.emplace(std::make_pair(cls[q], std::move(row)),
                                           std::uint32_t(ids.size()));
            next[q] = it->second;
        }
        bool stable = ids.size() == count;
        count = ids.size();
        cls = std::move(next);
        if (stable) break;
    }

    Nfa out;
    out.edges.resize(count);
    out.accept.assign(count, false);
    std::vector<bool> done(count, false);
    for (StateId q = 0; q < n; ++q) {
        std::uint32_t c = cls[q];
        if (done[c]) continue;
        done[c] = true;
        out.accept[c] = in.accept[q];
        for (const auto& e : in.edges[q]) out.edges[c].push_back({e.on, cls[e.to]});
    }
    out.start = cls[in.start];
    return out;
}

std::vector<StateId> epsilon_closure(const Builder& b, StateId s) {
    std::vector<bool> seen(b.states.size(), false);
    std::vector<StateId> stack{s}, out;
    seen[s] = true;
    while (!stack.empty()) {
        StateId q = stack.back();
        stack.pop_back();
        out.push_back(q);
        for (const auto& e : b.states[q]) {
            if (!e.on && !seen[e.to]) {
                seen[e.to] = true;
                stack.push_back(e.to);
            }
        }
    }
    return out;
}

}  // namespace

Nfa compile_nfa(const RegexAst& ast, std::size_t state_cap) {
    check_anchor_positions(*ast.root, true, true);

    Builder b;
    b.cap = state_cap;
    Frag f = build(b, *ast.root);
    const StateId n = StateId(b.states.size());

    // Epsilon elimination: q -a-> r for every p in closure(q) with p -a-> r.
    std::vector<std::vector<NfaEdge>> edges(n);
    std::vector<bool> accept(n, false);
    for (StateId q = 0; q < n; ++q) {
        std::map<StateId, CharSet> merged;
        for (StateId p : epsilon_closure(b, q)) {
            if (p == f.out) accept[q] = true;
            for (const auto& e : b.states[p]) {
                if (!e.on) continue;
                auto [it, fresh] = merged.emplace(e.to, *e.on);
                if (!fresh) it->second = it->second.unite(*e.on);
            }
        }
        for (auto& [to, set] : merged) edges[q].push_back({std::move(set), to});
    }

    // Trim to states reachable from start and co-reachable to an accept.
    std::vector<bool> fwd(n, false);
    {
        std::vector<StateId> stack{f.in};
        fwd[f.in] = true;
        while (!stack.empty()) {
            StateId q = stack.back();
            stack.pop_back();
            for (const auto& e : edges[q])
                if (!fwd[e.to]) {
                    fwd[e.to] = true;
                    stack.push_back(e.to);
                }
        }
    }
    std::vector<std::vector<StateId>> rev(n);
    for (StateId q = 0; q < n; ++q)
        for (const auto& e : edges[q]) rev[e.to].push_back(q);
    std::vector<bool> bwd(n, false);
    {
        std::vector<StateId> stack;
        for (StateId q = 0; q < n; ++q)
            if (accept[q]) {
                bwd[q] = true;
                stack.push_back(q);
            }
        while (!stack.empty()) {
            StateId q = stack.back();
            stack.pop_back();
            for (StateId p : rev[q])
                if (!bwd[p]) {
                    bwd[p] = true;
                    stack.push_back(p);
                }
        }
    }

    std::vector<StateId> remap(n, UINT32_MAX);
    Nfa out;
    for (StateId q = 0; q < n; ++q) {
        if (fwd[q] && bwd[q]) {
            remap[q] = StateId(out.edges.size());
            out.edges.emplace_back();
            out.accept.push_back(accept[q]);
        }
    }
    if (remap[f.in] == UINT32_MAX) {
        // Empty language; keep a lone start state.
        out.edges.assign(1, {});
        out.accept.assign(1, false);
        out.start = 0;
        return out;
    }
    out.start = remap[f.in];
    for (StateId q = 0; q < n; ++q) {
        if (remap[q] == UINT32_MAX) continue;
        for (const auto& e : edges[q]) {
            if (remap[e.to] == UINT32_MAX) continue;
            out.edges[remap[q]].push_back({e.on, remap[e.to]});
        }
    }
    return quotient(out);
}

namespace {

void render_codepoint(std::string& out, Codepoint c) {
    if (c >= 0x21 && c <= 0x7E && c != U'-' && c != U']' && c != U'\\') {
        out += char(c);
    } else {
        char buf[16];
        std::snprintf(buf, sizeof buf, "\\x{%X}", unsigned(c));
        out += buf;
    }
}

void render_set(std::string& out, const CharSet& s) {
    out += '[';
    for (const auto& r : s.ranges()) {
        render_codepoint(out, r.lo);
        if (r.hi != r.lo) {
            out += '-';
            render_codepoint(out, r.hi);
        }
    }
    out += ']';
}

}  // namespace

std::string dump_nfa(const Nfa& nfa) {
    std::string out = "start " + std::to_string(nfa.start) + "\n";
    out += "accept";
    for (StateId q = 0; q < nfa.size(); ++q)
        if (nfa.accept[q]) out += " " + std::to_string(q);
    out += "\n";
    for (StateId q = 0; q < nfa.size(); ++q) {
        for (const auto& e : nfa.edges[q]) {
            out += std::to_string(q) + " -> " + std::to_string(e.to) + " on ";
            render_set(out, e.on);
            out += "\n";
        }
    }
    return out;
}

std::vector<Codepoint> alphabet_representatives(const Nfa& nfa) {
    // Boundary points of every transition range induce the partition.
    std::set<Codepoint> cuts{0};
    CharSet used;
    for (const auto& st : nfa.edges) {
        for (const auto& e : st) {
            used = used.unite(e.on);
            for (const auto& r : e.on.ranges()) {
                cuts.insert(r.lo);
                if (r.hi < kMaxCodepoint) cuts.insert(r.hi + 1);
            }
        }
    }
    std::vector<Codepoint> reps(cuts.begin(), cuts.end());
    // Within each class prefer a printable representative when the class
    // spans one (keeps attack strings copy-pasteable).
    std::vector<Codepoint> out;
    std::vector<Codepoint> bounds(cuts.begin(), cuts.end());
    for (size_t i = 0; i < bounds.size(); ++i) {
        Codepoint lo = bounds[i];
        Codepoint hi = (i + 1 < bounds.size()) ? bounds[i + 1] - 1 : kMaxCodepoint;
        Codepoint pick = lo;
        if (lo < 0x21 && hi >= 0x21) pick = std::min<Codepoint>(hi, U'!');
        if (pick < 0x21 && hi >= lo) {
            for (Codepoint c = lo; c <= hi && c < lo + 0x80; ++c)
                if (c >= 0x21 && c <= 0x7E) {
                    pick = c;
                    break;
                }
        }
        out.push_back(pick);
    }
    return out;
}

bool dead_codepoint(const Nfa& nfa, Codepoint& out) {
    CharSet used;
    for (const auto& st : nfa.edges)
        for (const auto& e : st) used = used.unite(e.on);
    CharSet dead = used.complement();
    if (dead.empty()) return false;
    // Prefer a printable ASCII dead character.
    for (Codepoint c = 0x21; c <= 0x7E; ++c)
        if (dead.contains(c)) {
            out = c;
            return true;
        }
    out = dead.first();
    return true;
}

}  // namespace redos
