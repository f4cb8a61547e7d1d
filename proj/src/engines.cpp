#include "redos/engines.hpp"

#include <algorithm>

namespace redos {

namespace {

class ProgramBuilder {
public:
    explicit ProgramBuilder(std::size_t cap) : cap_(cap) {}

    std::vector<Inst> take() { return std::move(prog_); }

    void emit_node(const AstNode& n) {
        switch (n.kind) {
            case NodeKind::Empty:
                break;
            case NodeKind::AnchorStart:
                emit({Inst::Op::AssertStart});
                break;
            case NodeKind::AnchorEnd:
                emit({Inst::Op::AssertEnd});
                break;
            case NodeKind::Literal: {
                Inst i{Inst::Op::Char};
                i.on = CharSet::single(n.literal);
                emit(std::move(i));
                break;
            }
            case NodeKind::Dot: {
                Inst i{Inst::Op::Char};
                i.on = dot_set();
                emit(std::move(i));
                break;
            }
            case NodeKind::CharClass: {
                Inst i{Inst::Op::Char};
                i.on = n.cls;
                emit(std::move(i));
                break;
            }
            case NodeKind::Group:
                emit_node(*n.child);
                break;
            case NodeKind::Concat:
                for (const auto& c : n.children) emit_node(*c);
                break;
            case NodeKind::Alternation: {
                // Chain of splits, first branch preferred.
                std::vector<std::uint32_t> jumps;
                for (size_t i = 0; i < n.children.size(); ++i) {
                    if (i + 1 < n.children.size()) {
                        std::uint32_t sp = emit({Inst::Op::Split});
                        prog_[sp].x = pc();
                        emit_node(*n.children[i]);
                        jumps.push_back(emit({Inst::Op::Jmp}));
                        prog_[sp].y = pc();
                    } else {
                        emit_node(*n.children[i]);
                    }
                }
                for (auto j : jumps) prog_[j].x = pc();
                break;
            }
            case NodeKind::Repeat:
                emit_repeat(n);
                break;
        }
    }

private:
    std::uint32_t pc() const { return std::uint32_t(prog_.size()); }

    std::uint32_t emit(Inst i) {
        if (prog_.size() >= cap_) throw ExpansionLimit(cap_);
        prog_.push_back(std::move(i));
        return std::uint32_t(prog_.size() - 1);
    }

    void emit_star(const AstNode& body, bool lazy) {
        std::uint32_t sp = emit({Inst::Op::Split});
        std::uint32_t head = pc();
        emit_node(body);
        std::uint32_t jp = emit({Inst::Op::Jmp});
        prog_[jp].x = sp;
        if (lazy) {
            prog_[sp].x = pc();
            prog_[sp].y = head;
        } else {
            prog_[sp].x = head;
            prog_[sp].y = pc();
        }
    }

    void emit_optional(const AstNode& body, bool lazy) {
        std::uint32_t sp = emit({Inst::Op::Split});
        std::uint32_t head = pc();
        emit_node(body);
        if (lazy) {
            prog_[sp].x = pc();
            prog_[sp].y = head;
        } else {
            prog_[sp].x = head;
            prog_[sp].y = pc();
        }
    }

    void emit_repeat(const AstNode& n) {
        for (std::uint32_t i = 0; i < n.min; ++i) emit_node(*n.child);
        if (n.max == kUnboundedRepeat) {
            emit_star(*n.child, n.lazy);
        } else {
            for (std::uint32_t i = n.min; i < n.max; ++i) emit_optional(*n.child, n.lazy);
        }
    }

    std::vector<Inst> prog_;
    std::size_t cap_;
};

}  // namespace

CompiledRegex compile_regex(const RegexAst& ast, std::size_t state_cap) {
    CompiledRegex re;
    re.ast = ast;
    re.nfa = compile_nfa(ast, state_cap);
    re.anchor_mode = ast.anchor_mode;
    re.starts_anchored = ast.starts_anchored;
    re.ends_anchored = ast.ends_anchored;
    ProgramBuilder pb(state_cap * 4);
    pb.emit_node(*ast.root);
    re.program = pb.take();
    re.program.push_back({Inst::Op::Match});
    return re;
}

CompiledRegex compile_regex(std::string_view pattern, AnchorMode mode, std::size_t state_cap) {
    return compile_regex(parse(pattern, mode), state_cap);
}

MatchOutcome backtrack_match(const CompiledRegex& re, std::u32string_view input,
                             const BacktrackLimits& limits) {
    const auto t0 = std::chrono::steady_clock::now();
    MatchOutcome out;
    const std::size_t n = input.size();
    const bool full = re.anchor_mode == AnchorMode::FullMatch;

    std::size_t last_offset = 0;
    if (!full && !re.starts_anchored) last_offset = n;

    struct Pending {
        std::uint32_t pc;
        std::uint32_t pos;
    };
    std::vector<Pending> stack;
    std::uint64_t deadline_check = 0;

    for (std::size_t offset = 0; offset <= last_offset && !out.matched; ++offset) {
        stack.clear();
        stack.push_back({0, std::uint32_t(offset)});
        while (!stack.empty()) {
            std::uint32_t pc = stack.back().pc;
            std::uint32_t pos = stack.back().pos;
            stack.pop_back();
            bool alive = true;
            while (alive) {
                if (++out.steps >= limits.step_budget) {
                    out.budget_exhausted = true;
                    goto done;
                }
                if (limits.deadline && (++deadline_check & 0xFFFF) == 0 &&
                    std::chrono::steady_clock::now() > *limits.deadline) {
                    out.budget_exhausted = true;
                    goto done;
                }
                const Inst& in = re.program[pc];
                switch (in.op) {
                    case Inst::Op::Char:
                        if (pos < n && in.on.contains(input[pos])) {
                            ++pc;
                            ++pos;
                        } else {
                            alive = false;
                        }
                        break;
                    case Inst::Op::Split:
                        if (stack.size() >= limits.max_stack) {
                            out.budget_exhausted = true;
                            goto done;
                        }
                        stack.push_back({in.y, pos});
                        pc = in.x;
                        break;
                    case Inst::Op::Jmp:
                        pc = in.x;
                        break;
                    case Inst::Op::AssertStart:
                        if (pos == 0) ++pc; else alive = false;
                        break;
                    case Inst::Op::AssertEnd:
                        if (pos == n) ++pc; else alive = false;
                        break;
                    case Inst::Op::Match:
                        if (!full || pos == n) {
                            out.matched = true;
                            goto done;
                        }
                        alive = false;
                        break;
                }
            }
        }
    }
done:
    out.elapsed = std::chrono::steady_clock::now() - t0;
    return out;
}

MatchOutcome backtrack_match(const RegexAst& ast, std::string_view input, AnchorMode mode,
                             std::uint64_t step_budget) {
    RegexAst a = ast;
    a.anchor_mode = mode;
    CompiledRegex re = compile_regex(a);
    BacktrackLimits lim;
    lim.step_budget = step_budget;
    return backtrack_match(re, utf8_decode(input), lim);
}

namespace {

// Sparse frontier with O(1) dedupe.
struct Frontier {
    std::vector<StateId> states;
    std::vector<std::uint32_t> mark;
    std::uint32_t gen = 0;

    explicit Frontier(std::size_t n) : mark(n, 0) {}
    void clear() {
        states.clear();
        ++gen;
    }
    void add(StateId s) {
        if (mark[s] != gen) {
            mark[s] = gen;
            states.push_back(s);
        }
    }
};

}  // namespace

MatchOutcome linear_match(const Nfa& nfa, std::u32string_view input, AnchorMode mode,
                          bool starts_anchored, bool ends_anchored) {
    const auto t0 = std::chrono::steady_clock::now();
    MatchOutcome out;
    const std::size_t n = input.size();
    const bool full = mode == AnchorMode::FullMatch;

    Frontier cur(nfa.size()), next(nfa.size());
    cur.clear();
    cur.add(nfa.start);

    auto frontier_accepts = [&](const Frontier& f) {
        return std::any_of(f.states.begin(), f.states.end(),
                           [&](StateId q) { return nfa.accept[q]; });
    };

    for (std::size_t pos = 0;; ++pos) {
        out.steps += cur.states.size();
        const bool at_end = pos == n;
        if (full) {
            if (at_end) {
                out.matched = frontier_accepts(cur);
                break;
            }
        } else {
            if (frontier_accepts(cur) && (!ends_anchored || at_end)) {
                out.matched = true;
                break;
            }
            if (at_end) break;
        }
        next.clear();
        for (StateId q : cur.states)
            for (const auto& e : nfa.edges[q])
                if (e.on.contains(input[pos])) next.add(e.to);
        if (!full && !starts_anchored) next.add(nfa.start);
        std::swap(cur, next);
        if (full && cur.states.empty()) break;  // dead; no match possible
    }
    out.elapsed = std::chrono::steady_clock::now() - t0;
    return out;
}

MatchOutcome linear_match(const CompiledRegex& re, std::u32string_view input) {
    return linear_match(re.nfa, input, re.anchor_mode, re.starts_anchored, re.ends_anchored);
}

MatchOutcome linear_match(const Nfa& nfa, std::string_view input, AnchorMode mode,
                          bool starts_anchored, bool ends_anchored) {
    return linear_match(nfa, utf8_decode(input), mode, starts_anchored, ends_anchored);
}

bool nfa_accepts(const Nfa& nfa, std::u32string_view word) {
    return linear_match(nfa, word, AnchorMode::FullMatch, true, true).matched;
}

std::optional<EngineKind> engine_kind_from_string(std::string_view name) {
    if (name == "backtracking") return EngineKind::Backtracking;
    if (name == "linear") return EngineKind::LinearSafe;
    return std::nullopt;
}

std::string to_string(EngineKind k) {
    return k == EngineKind::Backtracking ? "backtracking" : "linear";
}

namespace {

class BacktrackingMatcher final : public Matcher {
public:
    explicit BacktrackingMatcher(std::uint64_t budget) : budget_(budget) {}
    MatchOutcome match(const CompiledRegex& re, std::string_view input) override {
        BacktrackLimits lim;
        lim.step_budget = budget_;
        return backtrack_match(re, utf8_decode(input), lim);
    }

private:
    std::uint64_t budget_;
};

class LinearMatcher final : public Matcher {
public:
    MatchOutcome match(const CompiledRegex& re, std::string_view input) override {
        return linear_match(re, utf8_decode(input));
    }
};

}  // namespace

std::unique_ptr<Matcher> EngineFactory::make() const {
    if (kind_ == EngineKind::Backtracking)
        return std::make_unique<BacktrackingMatcher>(budget_);
    return std::make_unique<LinearMatcher>();
}

}  // namespace redos
